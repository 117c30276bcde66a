//! Internal-data reconstruction pipelines.
//!
//! All three methods rearrange the Maxwell system into a first-order
//! transport equation for the unknown coefficient along paths through the
//! covered region and integrate it outward from a seeded cell. Method 1
//! uses the 3x6 cross-product matrix of curl H and is quadratic in q;
//! method 2 and the electro-seismic coupling step share the linear form
//! grad(z) . eta(w_i, w_j) = z gamma(w_i, w_j).

pub mod electroseismic;
pub mod linalg;
pub mod method1;
pub mod method2;
pub mod transport;

pub use electroseismic::{electroseismic_pipeline, EsOptions};
pub use method1::{build_m1, integrate_method1};
pub use method2::{build_m2, integrate_method2, M2Mode};
pub use transport::{
    integrate_over_cover, ErrorMetrics, ReconstructionReport, SeedValue, TransportData,
    TransportSystem, UnknownKind,
};
