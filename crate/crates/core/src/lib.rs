//! Online non-preemptive scheduling on unrelated machines with job
//! rejection, minimizing total weighted flow-time.
//!
//! The crate simulates the rejection-based online algorithm exactly (all
//! quantities are [`Rational`]), builds the dual-fitting certificate for
//! each run and checks every inequality of the analysis on the trace.
//! [`oracle`] adds an exhaustive optimum for tiny instances and simple
//! baselines, so competitive ratios can be measured at desk scale.
//!
//! ```
//! use rejsched::{analysis, engine, instance::parse_instance};
//!
//! let inst = parse_instance(
//!     "{\"machines\":1,\"epsilon\":\"1/2\"}\n{\"id\":0,\"r\":0,\"w\":1,\"p\":{\"m0\":5}}\n",
//! )
//! .unwrap();
//! let out = engine::simulate(&inst);
//! assert_eq!(out.totals.alg_weighted_flow, rejsched::Rational::from_int(5));
//! let cert = analysis::build_certificate(&out);
//! assert!(analysis::run_checks(&out, &cert).iter().all(|c| c.pass));
//! ```

#![allow(clippy::result_large_err)]

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod instance;
pub mod oracle;
pub mod policy;
pub mod rational;
pub mod report;

pub use rational::Rational;
