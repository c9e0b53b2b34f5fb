//! Numerical Aubry-Mather and weak KAM theory on the flat torus.
//!
//! The crate computes the action-minimizing objects attached to a Tonelli
//! Lagrangian L(x, v) on T^d × R^d: Mather's α and β functions, the Mañé
//! potential and critical value, the Peierls barrier, the Mather / Aubry /
//! Mañé sets, and weak KAM solutions of the Hamilton-Jacobi equation — each
//! through several independent computation routes that are cross-checked
//! against one another.
//!
//! A quick taste (the simple pendulum, L = ½v² + 1 − cos 2πx):
//!
//! ```
//! use weakkam::lagrangian::{CotangentPoint, LagrangianModel};
//! use weakkam::torus::TorusPoint;
//!
//! let pendulum = LagrangianModel::pendulum();
//! // the hyperbolic fixed point sits at energy 0
//! assert!(pendulum.energy(&[0.0], &[0.0]).abs() < 1e-12);
//! // Fenchel duality: H(x, p) = ½p² − (1 − cos 2πx)
//! let q = CotangentPoint::new(TorusPoint::from(0.5), vec![1.0]);
//! let h = pendulum.fenchel_hamiltonian(&q).unwrap();
//! assert!((h - (-1.5)).abs() < 1e-12);
//! ```
//!
//! The `book/` directory of the repository walks through the theory and the
//! API chapter by chapter; its code snippets are compiled as doc-tests.

pub mod action;
pub mod duality;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod fourier;
pub mod kam;
pub mod lagrangian;
pub mod lp;
pub mod model_file;
pub mod oneform;
pub mod optim;
pub mod path;
pub mod sets;
pub mod torus;

pub use error::{Error, Result};

// Book chapters double as doc-tests so the guide cannot drift from the API.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(lagrangians, "../../../book/src/lagrangians.md");
    chapter!(dynamics, "../../../book/src/dynamics.md");
    chapter!(minimizing_action, "../../../book/src/minimizing-action.md");
    chapter!(alpha_beta, "../../../book/src/alpha-beta.md");
    chapter!(invariant_sets, "../../../book/src/invariant-sets.md");
    chapter!(weak_kam, "../../../book/src/weak-kam.md");
    chapter!(cli, "../../../book/src/cli.md");
}
