//! Subspace alignment between physics-simulated (source) and measured
//! (target) data.
//!
//! Two methods are provided:
//!
//! * **Bergman**: aligns the bases themselves. `M = V_sᵀ·V_t` minimises
//!   `‖V_s·M − V_t‖_F`; source data are projected onto `V_a = V_s·M` and
//!   lifted with the target basis. With orthonormal full-rank bases this map
//!   collapses to the identity on centered data.
//! * **Procrustes**: aligns the embedded data. With `X̃_s = X_s·V_s` and
//!   `X̃_t = X_t·V_t`, the SVD `X̃_sᵀ·X̃_t = U·Σ·Wᵀ` gives the orthogonal map
//!   `r = U·Wᵀ` (reflections allowed) and the isotropic scale
//!   `s = tr Σ / tr(X̃_sᵀ·X̃_s)`. Both frames are centered, so the translation
//!   is zero.
//!
//! Forecasting centers new source data with the *training* source means and
//! re-adds the training target means. [`Centering::Independent`] instead
//! centers each window with its own means, which needs the measured target
//! mean over the forecast window.

mod pipeline;

pub use pipeline::{
    forecast_pipeline, simulate_run, Centering, ForecastMetrics, SimulatedRun, ForecastResult, InputSpec, ModelSpec, NoiseSpec, RomMethod,
    Scenario, TargetSpec,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix};
use crate::rom::{self, Subspace, SubspaceOrigin};
use crate::sim::TimeSeriesFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentMethod {
    Bergman,
    Procrustes,
}

impl AlignmentMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlignmentMethod::Bergman => "bergman",
            AlignmentMethod::Procrustes => "procrustes",
        }
    }
}

impl std::str::FromStr for AlignmentMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bergman" => Ok(AlignmentMethod::Bergman),
            "procrustes" => Ok(AlignmentMethod::Procrustes),
            other => Err(Error::Config(format!(
                "alignment must be `bergman` or `procrustes`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Bergman { m: Matrix },
    Procrustes { r: Matrix, s: f64, t: Vec<f64> },
}

/// A fitted source→target alignment, ready to transform new source data.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentModel {
    pub transform: Transform,
    pub source_basis: Subspace,
    pub target_basis: Subspace,
    /// Training means of the source channels.
    pub mu_s: Vec<f64>,
    /// Training means of the target channels.
    pub mu_t: Vec<f64>,
    pub source_channels: Vec<String>,
    pub target_channels: Vec<String>,
}

struct TrainingPair {
    xs: rom::CenteredFrame,
    xt: rom::CenteredFrame,
}

fn prepare(
    source_train: &TimeSeriesFrame,
    target_train: &TimeSeriesFrame,
    vs: &Subspace,
    vt: &Subspace,
) -> Result<TrainingPair> {
    source_train.ensure_aligned(target_train)?;
    for (frame, basis, context) in [
        (source_train, vs, "source channels vs source basis"),
        (target_train, vt, "target channels vs target basis"),
    ] {
        if frame.n_channels() != basis.ambient_dim() {
            return Err(Error::Dimension {
                context,
                expected: basis.ambient_dim(),
                got: frame.n_channels(),
            });
        }
    }
    if vs.dim() != vt.dim() {
        return Err(Error::Dimension {
            context: "subspace dimensions",
            expected: vs.dim(),
            got: vt.dim(),
        });
    }
    Ok(TrainingPair {
        xs: rom::center(source_train)?,
        xt: rom::center(target_train)?,
    })
}

impl AlignmentModel {
    pub fn method(&self) -> AlignmentMethod {
        match self.transform {
            Transform::Bergman { .. } => AlignmentMethod::Bergman,
            Transform::Procrustes { .. } => AlignmentMethod::Procrustes,
        }
    }

    /// `V_a = V_s·M` for Bergman models.
    pub fn target_aligned_basis(&self) -> Option<Matrix> {
        match &self.transform {
            Transform::Bergman { m } => Some(&self.source_basis.basis * m),
            Transform::Procrustes { .. } => None,
        }
    }

    /// Embedded source data mapped into target-embedded coordinates.
    pub fn align_embedded(&self, centered_source: &Matrix) -> Result<Matrix> {
        match &self.transform {
            Transform::Bergman { m } => {
                let va = &self.source_basis.basis * m;
                if centered_source.ncols() != va.nrows() {
                    return Err(Error::Dimension {
                        context: "source channels",
                        expected: va.nrows(),
                        got: centered_source.ncols(),
                    });
                }
                Ok(centered_source * va)
            }
            Transform::Procrustes { r, s, t } => {
                let mut x = rom::embed_values(centered_source, &self.source_basis)? * r * *s;
                for (mut col, ti) in x.column_iter_mut().zip(t) {
                    col.add_scalar_mut(*ti);
                }
                Ok(x)
            }
        }
    }

    /// Transforms a source frame (same channel layout as training) into a
    /// target-space prediction on the same time axis.
    pub fn apply(&self, source: &TimeSeriesFrame) -> Result<TimeSeriesFrame> {
        self.apply_with_means(source, &self.mu_s, &self.mu_t)
    }

    /// [`apply`](Self::apply) with explicit centering (`mu_s`) and
    /// re-meaning (`mu_t`) vectors in place of the training means.
    pub fn apply_with_means(
        &self,
        source: &TimeSeriesFrame,
        mu_s: &[f64],
        mu_t: &[f64],
    ) -> Result<TimeSeriesFrame> {
        if source.channels() != self.source_channels.as_slice() {
            return Err(Error::invalid(
                "source channels",
                format!(
                    "model fitted on {:?}, got {:?}",
                    self.source_channels,
                    source.channels()
                ),
            ));
        }
        let centered = rom::center_with(source, mu_s)?;
        let aligned = self.align_embedded(centered.data.values())?;
        rom::lift(
            &aligned,
            &self.target_basis,
            mu_t,
            source.dt(),
            source.start_index(),
            self.target_channels.clone(),
        )
    }

    /// True when the fitted map sends centered source data to itself
    /// (orthonormal full-rank Bergman alignment).
    pub fn is_identity_map(&self) -> Result<bool> {
        let n = self.source_basis.ambient_dim();
        if n != self.target_basis.ambient_dim() {
            return Ok(false);
        }
        let probe = Matrix::identity(n, n);
        let mapped = rom::lift_values(
            &self.align_embedded(&probe)?,
            &self.target_basis,
            &vec![0.0; n],
        )?;
        Ok((mapped - probe).amax() <= 1e-10)
    }

    /// Frobenius residuals `(embedded, lifted)` of the aligned source against
    /// the target on a paired window. The embedded residual compares
    /// `align_embedded(X_s)` with `X_t·V_t`; the lifted one compares frames.
    pub fn residuals(&self, source: &TimeSeriesFrame, target: &TimeSeriesFrame) -> Result<(f64, f64)> {
        source.ensure_aligned(target)?;
        let xs = rom::center_with(source, &self.mu_s)?;
        let xt = rom::center_with(target, &self.mu_t)?;
        let embedded_t = rom::embed(&xt, &self.target_basis)?;
        let embedded_a = self.align_embedded(xs.data.values())?;
        let lifted = self.apply(source)?;
        Ok((
            (embedded_t - embedded_a).norm(),
            (target.values() - lifted.values()).norm(),
        ))
    }
}

pub fn fit_bergman(
    source_train: &TimeSeriesFrame,
    target_train: &TimeSeriesFrame,
    vs: &Subspace,
    vt: &Subspace,
) -> Result<AlignmentModel> {
    let pair = prepare(source_train, target_train, vs, vt)?;
    let m = vs.basis.transpose() * &vt.basis;
    Ok(AlignmentModel {
        transform: Transform::Bergman { m },
        source_basis: vs.clone(),
        target_basis: vt.clone(),
        mu_s: pair.xs.means,
        mu_t: pair.xt.means,
        source_channels: source_train.channels().to_vec(),
        target_channels: target_train.channels().to_vec(),
    })
}

/// Orthogonal map and scale minimising `‖Y − s·X·r‖_F` for centered,
/// equally shaped `X`, `Y`.
pub fn procrustes(x: &Matrix, y: &Matrix) -> Result<(Matrix, f64)> {
    if x.shape() != y.shape() {
        return Err(Error::Dimension {
            context: "Procrustes embedded shapes",
            expected: x.ncols(),
            got: y.ncols(),
        });
    }
    let energy = (x.transpose() * x).trace();
    if !(energy > 0.0) {
        return Err(Error::ZeroNormalizer("Procrustes scale (zero-energy source window)"));
    }
    let svd = numerics::svd(&(x.transpose() * y))?;
    let r = &svd.u * &svd.vt;
    let s = svd.singular_values.iter().sum::<f64>() / energy;
    Ok((r, s))
}

pub fn fit_procrustes(
    source_train: &TimeSeriesFrame,
    target_train: &TimeSeriesFrame,
    vs: &Subspace,
    vt: &Subspace,
) -> Result<AlignmentModel> {
    let pair = prepare(source_train, target_train, vs, vt)?;
    let es = rom::embed(&pair.xs, vs)?;
    let et = rom::embed(&pair.xt, vt)?;
    let (r, s) = procrustes(&es, &et)?;
    Ok(AlignmentModel {
        transform: Transform::Procrustes {
            r,
            s,
            t: vec![0.0; vs.dim()],
        },
        source_basis: vs.clone(),
        target_basis: vt.clone(),
        mu_s: pair.xs.means,
        mu_t: pair.xt.means,
        source_channels: source_train.channels().to_vec(),
        target_channels: target_train.channels().to_vec(),
    })
}

pub fn fit(
    method: AlignmentMethod,
    source_train: &TimeSeriesFrame,
    target_train: &TimeSeriesFrame,
    vs: &Subspace,
    vt: &Subspace,
) -> Result<AlignmentModel> {
    match method {
        AlignmentMethod::Bergman => fit_bergman(source_train, target_train, vs, vt),
        AlignmentMethod::Procrustes => fit_procrustes(source_train, target_train, vs, vt),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    method: String,
    channels: usize,
    modes: usize,
    source_channels: Vec<String>,
    target_channels: Vec<String>,
    mu_s: Vec<f64>,
    mu_t: Vec<f64>,
    source_origin: String,
    source_orthonormal: bool,
    source_basis: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_eigenvalues: Option<Vec<f64>>,
    target_origin: String,
    target_orthonormal: bool,
    target_basis: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_eigenvalues: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<Vec<f64>>,
}

fn row_major(m: &Matrix) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

fn from_row_major(rows: usize, cols: usize, v: &[f64], what: &str) -> Result<Matrix> {
    if v.len() != rows * cols {
        return Err(Error::Config(format!(
            "`{what}` needs {} entries, found {}",
            rows * cols,
            v.len()
        )));
    }
    Ok(Matrix::from_row_slice(rows, cols, v))
}

fn origin_name(o: SubspaceOrigin) -> &'static str {
    match o {
        SubspaceOrigin::Physics => "physics",
        SubspaceOrigin::Pod => "pod",
        SubspaceOrigin::Dmd => "dmd",
    }
}

fn parse_origin(s: &str) -> Result<SubspaceOrigin> {
    match s {
        "physics" => Ok(SubspaceOrigin::Physics),
        "pod" => Ok(SubspaceOrigin::Pod),
        "dmd" => Ok(SubspaceOrigin::Dmd),
        other => Err(Error::Config(format!("unknown subspace origin `{other}`"))),
    }
}

impl AlignmentModel {
    /// Flat `key = value` document with matrices stored row-major.
    pub fn to_text(&self) -> Result<String> {
        let (m, r, s, t) = match &self.transform {
            Transform::Bergman { m } => (Some(row_major(m)), None, None, None),
            Transform::Procrustes { r, s, t } => (None, Some(row_major(r)), Some(*s), Some(t.clone())),
        };
        let doc = ModelDocument {
            method: self.method().as_str().to_string(),
            channels: self.source_basis.ambient_dim(),
            modes: self.source_basis.dim(),
            source_channels: self.source_channels.clone(),
            target_channels: self.target_channels.clone(),
            mu_s: self.mu_s.clone(),
            mu_t: self.mu_t.clone(),
            source_origin: origin_name(self.source_basis.origin).into(),
            source_orthonormal: self.source_basis.orthonormal,
            source_basis: row_major(&self.source_basis.basis),
            source_eigenvalues: self.source_basis.eigenvalues.clone(),
            target_origin: origin_name(self.target_basis.origin).into(),
            target_orthonormal: self.target_basis.orthonormal,
            target_basis: row_major(&self.target_basis.basis),
            target_eigenvalues: self.target_basis.eigenvalues.clone(),
            m,
            r,
            s,
            t,
        };
        toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let doc: ModelDocument = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let (n, d) = (doc.channels, doc.modes);
        let source_basis = Subspace::new(
            from_row_major(n, d, &doc.source_basis, "source_basis")?,
            doc.source_eigenvalues,
            doc.source_orthonormal,
            parse_origin(&doc.source_origin)?,
        )?;
        let target_basis = Subspace::new(
            from_row_major(n, d, &doc.target_basis, "target_basis")?,
            doc.target_eigenvalues,
            doc.target_orthonormal,
            parse_origin(&doc.target_origin)?,
        )?;
        let missing = |k: &str| Error::Config(format!("`{k}` is required for method `{}`", doc.method));
        let transform = match doc.method.parse::<AlignmentMethod>()? {
            AlignmentMethod::Bergman => Transform::Bergman {
                m: from_row_major(d, d, doc.m.as_deref().ok_or_else(|| missing("m"))?, "m")?,
            },
            AlignmentMethod::Procrustes => Transform::Procrustes {
                r: from_row_major(d, d, doc.r.as_deref().ok_or_else(|| missing("r"))?, "r")?,
                s: doc.s.ok_or_else(|| missing("s"))?,
                t: doc.t.ok_or_else(|| missing("t"))?,
            },
        };
        Ok(AlignmentModel {
            transform,
            source_basis,
            target_basis,
            mu_s: doc.mu_s,
            mu_t: doc.mu_t,
            source_channels: doc.source_channels,
            target_channels: doc.target_channels,
        })
    }
}
