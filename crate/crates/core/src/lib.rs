//! Kim-type functions `f(x) = x^{3q} + a1 x^{2q+1} + a2 x^{q+2} + a3 x^3` over
//! F_{q²}, `q = 2^m`: an APN predicate, a brute-force differential oracle, and
//! explicit linear equivalences to the Gold functions `x^3` and
//! `x^{2^{m-1}+1}`.
//!
//! ```
//! use kimgold::{classify, FieldCtx, KimCoeffs, verify_witness};
//!
//! let ctx = FieldCtx::new(4).unwrap();
//! let k = KimCoeffs::from_encodings(&ctx, 0, 0, 0).unwrap();
//! let res = classify(&ctx, &k).unwrap();
//! assert!(res.is_apn());
//! assert!(verify_witness(&ctx, res.witness.as_ref().unwrap()));
//! ```

pub mod bitmatrix;
pub mod cli;
pub mod ddt;
pub mod equiv;
pub mod error;
pub mod field;
pub mod kim;
pub mod linmap;

pub use bitmatrix::BitMatrix;
pub use ddt::{differential_uniformity, is_apn_bruteforce, FunctionTable};
pub use equiv::{classify, ClassifyResult, RouteTag, Status};
pub use error::{Error, Result};
pub use field::{make_field, FieldCtx, FieldElem, FieldSpec, UnitCircleElem};
pub use kim::{gamma_report, is_apn_by_theorem, GammaReport, KimCoeffs};
pub use linmap::{verify_witness, EquivWitness, Fragment, LinMap, Target};
