//! Simulation of the heterogeneous multiplayer multi-armed bandit game with
//! collisions, and decentralized algorithms that play it.
//!
//! `M` players repeatedly pull one of `K` arms. Player `m` pulling arm `k`
//! draws a reward with mean `μ[m][k]`, unless another player pulled the same
//! arm in that round: then every involved player gets zero and observes the
//! collision. Players never talk to each other directly.
//!
//! The crate provides:
//!
//! * [`model`]: reward matrices, matchings, utilities and gaps.
//! * [`assignment`]: Hungarian maximum-weight matching (plain and with a
//!   forced edge) and an exhaustive enumeration oracle.
//! * [`simenv`]: the lockstep round simulator and regret accounting.
//! * [`protocol`]: bit-level communication over forced collisions.
//! * [`metc_elim`]: the M-ETC-Elim leader/follower automata.
//! * [`baselines`]: the Selfish-UCB baseline.
//! * [`experiment`]: seeded replication harness writing CSV traces.
//!
//! ```
//! use mpbandit::model::{builtin_u1, utility, Matching};
//!
//! let u1 = builtin_u1();
//! let pi = Matching::new(vec![2, 1, 0]);
//! assert!((utility(u1.means(), &pi).unwrap() - 1.55).abs() < 1e-12);
//! ```

pub mod assignment;
pub mod baselines;
pub mod error;
pub mod experiment;
pub mod metc_elim;
pub mod model;
pub mod protocol;
pub mod seeding;
pub mod simenv;

pub use error::{Error, Result};
