//! Exact computer algebra for polynomial models of real hypersurfaces in
//! `C^n`: multitypes, Levi-form positivity, the balanced sum-of-squares
//! normal form and boundary systems.

pub mod boundary;
pub mod coord;
pub mod json;
pub mod levi;
pub mod linalg;
pub mod model;
pub mod multitype;
pub mod normal_form;
pub mod num;
pub mod parse;
pub mod poly;
pub mod weights;

pub use boundary::{build_boundary_system, detect_torsion, BoundarySystem};
pub use coord::CoordChange;
pub use multitype::{multitype_search, Multitype, MultitypeStatus};
pub use normal_form::{normalize, verify_normal_form, NormalForm};
pub use num::{ExtQ, C, Q};
pub use parse::{parse_expr, parse_poly};
pub use poly::{HermPoly, Mono, Poly};
pub use weights::{InverseWeight, Weight};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polynomials.md")]
    mod polynomials {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/positivity.md")]
    mod positivity {}
    #[doc = include_str!("../../../book/src/normal-form.md")]
    mod normal_form {}
    #[doc = include_str!("../../../book/src/boundary-systems.md")]
    mod boundary_systems {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
