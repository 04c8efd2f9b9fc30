//! Analysis engine for cuspidal nilpotent foliation germs
//! `d(z^2 + f^k) + alpha f^n U(f) dz`: exact series and forms, monomial blow-ups,
//! local classification, first-integral criteria, numerical holonomy and
//! dicriticalness sections.

pub mod blowup;
pub mod error;
pub mod scalar;
pub mod series;
pub mod form;
pub mod parse;
pub mod poly;
pub mod subst;
pub mod verdict;
pub mod normal_form;
pub mod linalg;
pub mod classify;
pub mod criteria;
pub mod ode;
pub mod holonomy;
pub mod integral;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use series::TruncSeries;
