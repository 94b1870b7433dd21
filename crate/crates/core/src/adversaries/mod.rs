//! Reward constructions for the hidden bandit.

pub mod consistent;
pub mod kernel;
pub mod mrw;
pub mod reference;

pub use consistent::{mt_adversary, ConsistentAdversary, MtDraw, MtTable};
pub use mrw::{depth_width, mrw_adversary, parent, sample_step, DepthWidth, MrwParams, MrwRealization};
