//! Berezin calculus, Chern forms, transgression forms and λ-regularized
//! currents for Hermitian holomorphic bundles on coordinate charts.

pub mod currents;
pub mod error;
pub mod expr;
pub mod forms;
pub mod geometry;
pub mod grassmann;
pub mod identities;
pub mod jets;
pub mod positivity;
pub mod projective;
pub mod quadrature;
pub mod section;

pub use error::{Error, Result};
pub use expr::{Expr, Poly};
pub use geometry::{chern_connection, BundleGeometry, MetricField, MetricModel, MetricSource, RandomMetric};
pub use grassmann::{Coeff, GeneratorSet, Multivector};
pub use jets::{FormField, Jet, JetSpace, ALEPH};
pub use section::{Ingredients, SectionField, SectionModel};
