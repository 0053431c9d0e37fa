//! Compile piecewise-polynomial potentials into diagonal-unitary circuits.
//!
//! The pipeline runs left to right through the modules:
//!
//! * [`potential`] and [`grid`] describe `V(x)` on a dyadic mesh of `[a, b)`;
//! * [`approx`] fits a piecewise quadratic `f` with `|f - V| ≤ ε` at the mesh;
//! * [`walsh`] rewrites `f` as a sum of Pauli-Z strings;
//! * [`synth`] emits the circuit for `e^{-if}` and predicts its gate counts;
//! * [`statevector`] checks the circuit and runs split-step dynamics;
//! * [`experiments`] drives the command-line tool.
//!
//! ```
//! use pwdiag::{approx, grid::DomainMap, potential::Potential, synth, walsh::Mode};
//!
//! let domain = DomainMap::new(-std::f64::consts::PI, std::f64::consts::PI, 7)?;
//! let (f, cells) = approx::approximate_uniform(&Potential::cos(), &domain, 0.1, 2, 7)?;
//! let circuit = synth::build_circuit(&f, &cells, 7, Mode::AncillaFree, 0.0)?;
//! let counts = synth::count_gates(&circuit);
//! assert_eq!((counts.rz, counts.cnot), (63, 112));
//! # Ok::<(), pwdiag::Error>(())
//! ```

pub mod approx;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod potential;
pub mod statevector;
pub mod synth;
pub mod walsh;

pub use error::{Error, Result};

macro_rules! book_chapters {
    ($($name:ident => $file:literal),* $(,)?) => {
        $(
            #[cfg(doctest)]
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            mod $name {}
        )*
    };
}

book_chapters! {
    book_overview => "overview.md",
    book_grid => "grid.md",
    book_fitting => "fitting.md",
    book_walsh => "walsh.md",
    book_synthesis => "synthesis.md",
    book_counts => "counts.md",
    book_dynamics => "dynamics.md",
    book_cli => "cli.md",
}
