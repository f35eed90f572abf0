//! Random-graph null models with regularly-varying degrees.
//!
//! The crate covers the configuration model (CM), its erased variant (ECM)
//! and rank-1 inhomogeneous random graphs (IRG) with heavy-tailed weights
//! (`1 < gamma < 2`). On top of the generators it computes exact graph
//! statistics (Pearson degree correlation, multiplicity-weighted triangle
//! counts, clustering), samples the stable-law limit objects built from a
//! shared Gamma sequence, evaluates the limit-law integrals, and runs
//! reproducible Monte Carlo experiments that check the scaling laws.
//!
//! ```
//! use nullmodels::degree_model::{DegreeLaw, DegreeSequence};
//! use nullmodels::graphs::{erase, generate_cm};
//! use nullmodels::rng::replica_rng;
//!
//! let law = DegreeLaw::new(1.5, 1.0).unwrap();
//! let mut rng = replica_rng(7, 0, 0);
//! let seq = DegreeSequence::sample(&law, 1000, &mut rng);
//! let cm = generate_cm(&seq, &mut rng).unwrap();
//! let (ecm, report) = erase(&cm);
//! assert_eq!(ecm.total_degree() + 2 * report.z_total, cm.total_degree());
//! ```

pub mod degree_model;
pub mod error;
pub mod experiments;
pub mod graphs;
pub mod integrals;
pub mod io;
pub mod rng;
pub mod special;
pub mod statistics;
pub mod stable_limits;

pub use error::{Error, Result};
