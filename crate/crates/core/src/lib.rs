//! Numerical toolkit for the cone extension operator and refined Strichartz
//! estimates for the wave equation.
//!
//! The crate is organised bottom-up:
//!
//! * [`cone`] holds the geometry: the unitary `A`, cone normals, caps and the
//!   Lorentz rescalings.
//! * [`grid`] discretises functions on the frequency annulus and covers
//!   `B(0,R)` by lattice cubes.
//! * [`extension`] evaluates `Ef` and transforms of atomic measures.
//! * [`packets`] implements the box and wave-packet decompositions.
//! * [`measures`] and [`conical`] build fractal test measures and measure the
//!   decay of their conical averages.
//! * [`bounds`] tabulates the closed-form exponents.
//! * [`constructions`] and [`harness`] build the sharpness and lattice
//!   examples and monitor the inequalities.
//!
//! All reductions are performed in a fixed order, so results are independent
//! of the rayon pool size.

pub mod bounds;
pub mod cone;
pub mod conical;
pub mod constructions;
pub mod error;
pub mod extension;
pub mod fft;
pub mod grid;
pub mod harness;
pub mod io;
pub mod measures;
pub mod numeric;
pub mod packets;

pub use cone::{Cap, ConeConfig, LorentzMap, OrientedBox, Selector};
pub use conical::DecayFit;
pub use error::{Error, Result};
pub use extension::SpacetimePointSet;
pub use grid::{CubeCover, GridFunction};
pub use measures::AtomicMeasure;
pub use numeric::C64;
pub use packets::PacketDecomposition;

