//! Green functions: killed Green functions on bounded domains, the
//! symmetrizing conjugation, torus quadrature for `J`, and a power-series oracle.

pub mod domain;
pub mod finite;
pub mod jtable;
pub mod lemma1;
pub mod one_point;
pub mod quadrature;
pub mod series;
pub mod symmetrize;

use std::path::Path;

pub use domain::Domain;
pub use finite::{green_finite, GreenMatrix, GreenTable};
pub use jtable::{j_closed_form_1d, j_exact, j_limit, JMethod, JTable, QuadSettings};
pub use lemma1::{lemma1_check, Lemma1Check};
pub use one_point::{one_point_green_ratio, one_point_second_order, OnePointWeight};
pub use quadrature::{torus_quadrature, Refined};
pub use series::{series_oracle, SeriesResult};
pub use symmetrize::{kgamma_expansion_check, symmetrize, KGammaReport, Symmetrization};

use crate::error::Result;
use crate::model::TransitionKernel;
use crate::report::{fmt_f64, CsvReport};

impl GreenTable {
    /// One row per site of `U ∪ ∂U`; `est_error` is the balance-identity residual.
    pub fn write_csv(&self, path: &Path, config: &str, kernels: &[TransitionKernel]) -> Result<()> {
        let residual = self.balance_residual(kernels);
        let d = self.domain.dim();
        let mut csv = CsvReport::create(path, config, &["site", "value", "method", "horizon", "est_error"])?;
        for (z, v) in self.domain.closure().iter().zip(&self.values) {
            csv.row(&[z.display(d), fmt_f64(*v), "direct".into(), String::new(), fmt_f64(residual)])?;
        }
        csv.finish()
    }
}
