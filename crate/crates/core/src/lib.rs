//! Joint link scheduling and power allocation for wireless caching networks.
//!
//! Caching nodes (fixed helpers or idle D2D devices) deliver chunks of cached files
//! to requesting users over a shared, interference-limited channel. Each slot a
//! scheduler picks, for every node, either idle or one user plus a discrete power
//! level, maximizing the drift-plus-penalty utility `Σ Q_n μ_n − V Σ q_m`.
//!
//! The proposed scheduler runs loopy belief propagation over the node/user factor
//! graph ([`bp`]) and repairs its many-to-one conflicts with a displacement-based
//! matching ([`matching`]). Exhaustive and clustering baselines live in
//! [`baselines`]; [`sim`] drives multi-slot experiments and writes metrics.
//!
//! ```text
//!  topology ──► channel ──► objective ◄── queueing
//!                              ▲
//!               bp ──► matching │ baselines
//!                              │
//!                             sim
//! ```

pub mod baselines;
pub mod bp;
pub mod channel;
pub mod error;
pub mod matching;
pub mod objective;
pub mod queueing;
pub mod rng;
pub mod sim;
pub mod topology;

pub use channel::{path_gain, sample_channel, ChannelRealization};
pub use error::{Error, Result};
pub use objective::{Isolation, NodeDecision, PhyParams, PowerGrid, ScheduleDecision, SlotContext};
pub use queueing::QueueState;
pub use topology::{Library, Placement, Point, Topology};
