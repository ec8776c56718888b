//! One-dimensional transient conduction through a homogeneous wall, used as
//! the stand-in for measured data.
//!
//! Cell-centred finite volumes with implicit Euler time stepping. Cell 0
//! touches the interior face, cell `N−1` the exterior face. The exterior
//! face has a convective (Robin) boundary to `T_ext`; the interior face is
//! adiabatic unless the indoor branch is enabled, in which case it exchanges
//! heat with `T_int` through `h_in`.

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::thermal::WallSpec;

use super::TimeSeriesFrame;

#[derive(Debug, Clone, PartialEq)]
pub struct FdWallConfig {
    pub cells: usize,
    pub wall: WallSpec,
    /// Sensor positions as fractions of the thickness measured from the
    /// interior face; 0 and 1 are the two surfaces. Channel `i` is named
    /// after `sensor_names[i]`.
    pub sensor_depths: Vec<f64>,
    pub sensor_names: Vec<String>,
    /// Implicit-Euler substeps per output sample.
    pub substeps: usize,
}

impl FdWallConfig {
    pub fn new(wall: WallSpec) -> Self {
        FdWallConfig {
            cells: 20,
            wall,
            sensor_depths: vec![0.0, 1.0],
            sensor_names: vec!["T_ext1".into(), "T_ext2".into()],
            substeps: 6,
        }
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.wall.validate()?;
        if self.cells < 3 {
            return Err(Error::invalid("cells", format!("need at least 3, got {}", self.cells)));
        }
        if self.substeps == 0 {
            return Err(Error::invalid("substeps", "must be at least 1"));
        }
        if self.sensor_depths.len() != self.sensor_names.len() {
            return Err(Error::Dimension {
                context: "sensor names",
                expected: self.sensor_depths.len(),
                got: self.sensor_names.len(),
            });
        }
        if let Some(d) = self.sensor_depths.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(Error::invalid("sensor_depths", format!("{d} is outside [0, 1]")));
        }
        Ok(())
    }
}

/// Wall state plus the per-unit-area discretisation coefficients.
#[derive(Debug, Clone)]
pub struct FdWall {
    temps: Vec<f64>,
    /// J/(m²·K) per cell
    capacity: f64,
    /// W/(m²·K) between neighbouring cell centres
    g_inner: f64,
    /// W/(m²·K) from the last cell centre to outdoor air
    g_out: f64,
    /// W/(m²·K) from the first cell centre to indoor air, zero when adiabatic
    g_in: f64,
    dx: f64,
    conductivity: f64,
}

impl FdWall {
    pub fn new(wall: &WallSpec, cells: usize, initial: &[f64]) -> Result<Self> {
        wall.validate()?;
        if initial.len() != cells {
            return Err(Error::Dimension {
                context: "finite-difference initial profile",
                expected: cells,
                got: initial.len(),
            });
        }
        let m = &wall.material;
        let dx = wall.thickness / cells as f64;
        let half = dx / (2.0 * m.conductivity);
        Ok(FdWall {
            temps: initial.to_vec(),
            capacity: m.density * m.specific_heat * dx,
            g_inner: m.conductivity / dx,
            g_out: 1.0 / (half + 1.0 / wall.h_out),
            g_in: if wall.indoor_branch {
                1.0 / (half + 1.0 / wall.h_in)
            } else {
                0.0
            },
            dx,
            conductivity: m.conductivity,
        })
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temps
    }

    /// Stored heat per unit area relative to 0 °C, J/m².
    pub fn energy(&self) -> f64 {
        self.capacity * self.temps.iter().sum::<f64>()
    }

    /// Net heat flux into the wall, W/m².
    pub fn boundary_flux(&self, t_ext: f64, t_int: f64) -> f64 {
        let n = self.temps.len();
        self.g_out * (t_ext - self.temps[n - 1]) + self.g_in * (t_int - self.temps[0])
    }

    /// One implicit-Euler step of length `dt` with boundary air temperatures
    /// held fixed over the step.
    pub fn step(&mut self, dt: f64, t_ext: f64, t_int: f64) -> Result<()> {
        let n = self.temps.len();
        let c = self.capacity / dt;
        let g = self.g_inner;
        let mut lower = vec![-g; n];
        let mut diag = vec![c + 2.0 * g; n];
        let mut upper = vec![-g; n];
        let mut rhs: Vec<f64> = self.temps.iter().map(|t| c * t).collect();
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        diag[0] = c + g + self.g_in;
        rhs[0] += self.g_in * t_int;
        diag[n - 1] = c + g + self.g_out;
        rhs[n - 1] += self.g_out * t_ext;
        self.temps = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        Ok(())
    }

    /// Surface temperatures `(interior, exterior)` from the boundary flux
    /// balance over the half cell next to each face.
    pub fn surface_temperatures(&self, t_ext: f64, t_int: f64) -> (f64, f64) {
        let n = self.temps.len();
        let half = self.dx / (2.0 * self.conductivity);
        let inner = self.temps[0] + self.g_in * (t_int - self.temps[0]) * half;
        let outer = self.temps[n - 1] + self.g_out * (t_ext - self.temps[n - 1]) * half;
        (inner, outer)
    }

    /// Temperature at `fraction` of the thickness from the interior face:
    /// linear between cell centres, and between the outermost centre and the
    /// surface within the half cells next to each face.
    pub fn sample(&self, fraction: f64, thickness: f64, t_ext: f64, t_int: f64) -> f64 {
        let n = self.temps.len();
        let (inner, outer) = self.surface_temperatures(t_ext, t_int);
        let pos = fraction * thickness / self.dx - 0.5;
        if pos <= 0.0 {
            let w = (pos + 0.5) / 0.5;
            return inner * (1.0 - w) + self.temps[0] * w;
        }
        let i = pos.floor() as usize;
        if i >= n - 1 {
            let w = (pos - (n - 1) as f64) / 0.5;
            return self.temps[n - 1] * (1.0 - w) + outer * w;
        }
        let w = pos - i as f64;
        self.temps[i] * (1.0 - w) + self.temps[i + 1] * w
    }
}

/// Thomas algorithm; fails on a vanishing pivot.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = diag[i] - lower[i] * c_prime[i - 1];
        }
        if !(pivot.abs() > f64::MIN_POSITIVE) || !pivot.is_finite() {
            return Err(Error::Singular("finite-difference tridiagonal solve"));
        }
        c_prime[i] = upper[i] / pivot;
        let prev = if i > 0 { d_prime[i - 1] } else { 0.0 };
        d_prime[i] = (rhs[i] - lower[i] * prev) / pivot;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::NonFinite("finite-difference solution"))
    }
}

/// Simulates the wall under `inputs` (a `T_ext` channel, plus `T_int` when the
/// indoor branch is on) from the cell profile `x0`.
///
/// Row `t` of the result holds the sensor temperatures after applying input
/// row `t` over one sample interval, matching [`super::rollout`] indexing.
pub fn fd_simulate(cfg: &FdWallConfig, inputs: &TimeSeriesFrame, x0: &[f64]) -> Result<TimeSeriesFrame> {
    cfg.validate()?;
    let t_ext = inputs.channel("T_ext")?;
    let t_int = if cfg.wall.indoor_branch {
        inputs.channel("T_int")?
    } else {
        vec![0.0; inputs.len()]
    };
    let mut wall = FdWall::new(&cfg.wall, cfg.cells, x0)?;
    let sub_dt = inputs.dt() / cfg.substeps as f64;
    let k = cfg.sensor_depths.len();
    let mut out = Matrix::zeros(inputs.len(), k);
    for t in 0..inputs.len() {
        for _ in 0..cfg.substeps {
            wall.step(sub_dt, t_ext[t], t_int[t])?;
        }
        for (j, &depth) in cfg.sensor_depths.iter().enumerate() {
            out[(t, j)] = wall.sample(depth, cfg.wall.thickness, t_ext[t], t_int[t]);
        }
    }
    TimeSeriesFrame::new(
        inputs.dt(),
        inputs.start_index() + 1,
        cfg.sensor_names.clone(),
        out,
    )
}
