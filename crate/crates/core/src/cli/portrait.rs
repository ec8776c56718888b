//! Phase portraits of two-state wall models: vector field samples,
//! free-response trajectories and an SVG rendering with one panel per
//! operator.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix};
use crate::rom;
use crate::sim::TimeSeriesFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorSource {
    /// Continuous field `x ↦ A·x` of the physics model.
    Physics,
    /// Discrete field `x ↦ (Φ − I)·x / dt` of the DMD operator fitted to data.
    Dmd,
}

impl OperatorSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorSource::Physics => "physics",
            OperatorSource::Dmd => "dmd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortraitRequest {
    pub operators: Vec<OperatorSource>,
    /// °C bounds of the `T_ext1` axis.
    pub t1_range: [f64; 2],
    /// °C bounds of the `T_ext2` axis.
    pub t2_range: [f64; 2],
    /// Grid points per axis.
    pub resolution: usize,
    pub initial_states: Vec<[f64; 2]>,
    pub steps: usize,
}

impl Default for PortraitRequest {
    fn default() -> Self {
        PortraitRequest {
            operators: vec![OperatorSource::Physics, OperatorSource::Dmd],
            t1_range: [-12.0, 12.0],
            t2_range: [-12.0, 12.0],
            resolution: 21,
            initial_states: vec![[10.73, 10.82]],
            steps: 300,
        }
    }
}

impl PortraitRequest {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::invalid("resolution", format!("need at least 2 points per axis, got {}", self.resolution)));
        }
        for (name, r) in [("t1_range", self.t1_range), ("t2_range", self.t2_range)] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(Error::invalid(name, format!("need finite lo < hi, got {r:?}")));
            }
        }
        if self.operators.is_empty() {
            return Err(Error::invalid("operators", "at least one operator is required"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be at least 1"));
        }
        if self.initial_states.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("initial_states", "must be finite"));
        }
        Ok(())
    }

    /// Grid points, `T_ext1` varying fastest.
    pub fn grid(&self) -> Vec<[f64; 2]> {
        let axis = |r: [f64; 2], i: usize| r[0] + (r[1] - r[0]) * i as f64 / (self.resolution - 1) as f64;
        (0..self.resolution)
            .flat_map(|j| (0..self.resolution).map(move |i| (i, j)))
            .map(|(i, j)| [axis(self.t1_range, i), axis(self.t2_range, j)])
            .collect()
    }
}

/// A sampled portrait for one operator.
#[derive(Debug, Clone)]
pub struct Portrait {
    pub operator: OperatorSource,
    /// `(point, velocity)` pairs in °C and °C/s.
    pub field: Vec<([f64; 2], [f64; 2])>,
    /// One frame per initial state; row 0 is the initial state.
    pub trajectories: Vec<TimeSeriesFrame>,
}

fn check_two_state(m: &Matrix, what: &str) -> Result<()> {
    if m.shape() != (2, 2) {
        return Err(Error::invalid(what, format!("portraits need a 2x2 operator, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

fn apply2(m: &Matrix, x: [f64; 2]) -> [f64; 2] {
    [
        m[(0, 0)] * x[0] + m[(0, 1)] * x[1],
        m[(1, 0)] * x[0] + m[(1, 1)] * x[1],
    ]
}

/// Zero-input trajectory `x_{k+1} = Φ·x_k`.
pub fn trajectory(phi: &Matrix, x0: [f64; 2], steps: usize, dt: f64) -> Result<TimeSeriesFrame> {
    check_two_state(phi, "phi")?;
    let mut values = Matrix::zeros(steps + 1, 2);
    let mut x = x0;
    for k in 0..=steps {
        values[(k, 0)] = x[0];
        values[(k, 1)] = x[1];
        x = apply2(phi, x);
    }
    TimeSeriesFrame::new(dt, 0, vec!["T_ext1".into(), "T_ext2".into()], values)
}

/// Portrait of a continuous operator `A` with trajectories from `e^{dt·A}`.
pub fn physics_portrait(a: &Matrix, dt: f64, req: &PortraitRequest) -> Result<Portrait> {
    check_two_state(a, "A")?;
    req.validate()?;
    let phi = numerics::expm_dt(a, dt)?;
    let field = req.grid().into_iter().map(|p| (p, apply2(a, p))).collect();
    let trajectories = req
        .initial_states
        .iter()
        .map(|&x0| trajectory(&phi, x0, req.steps, dt))
        .collect::<Result<_>>()?;
    Ok(Portrait {
        operator: OperatorSource::Physics,
        field,
        trajectories,
    })
}

/// Portrait of a discrete operator `Φ` sampled every `dt` seconds.
pub fn discrete_portrait(phi: &Matrix, dt: f64, req: &PortraitRequest, operator: OperatorSource) -> Result<Portrait> {
    check_two_state(phi, "phi")?;
    req.validate()?;
    let rate = (phi - Matrix::identity(2, 2)) / dt;
    let field = req.grid().into_iter().map(|p| (p, apply2(&rate, p))).collect();
    let trajectories = req
        .initial_states
        .iter()
        .map(|&x0| trajectory(phi, x0, req.steps, dt))
        .collect::<Result<_>>()?;
    Ok(Portrait {
        operator,
        field,
        trajectories,
    })
}

/// One-step DMD operator `K = X₂·X₁⁺` fitted to centered data at full rank.
/// `K` is real whatever its spectrum, so this works on data whose modes
/// come out complex.
pub fn dmd_operator(data: &TimeSeriesFrame) -> Result<Matrix> {
    let centered = rom::center(data)?;
    let x = centered.data.values();
    let z = x.nrows();
    if z < x.ncols() + 1 {
        return Err(Error::invalid("data", "DMD operator needs more snapshots than channels"));
    }
    let x1 = x.rows(0, z - 1).transpose();
    let x2 = x.rows(1, z - 1).transpose();
    let k = x2 * numerics::pinv(&x1)?;
    numerics::ensure_finite(&k, "DMD operator")?;
    Ok(k)
}

/// Field samples as a frame: one row per grid point, the step column being
/// the point index.
pub fn field_frame(p: &Portrait) -> Result<TimeSeriesFrame> {
    let values = Matrix::from_fn(p.field.len(), 4, |r, c| {
        let (x, v) = p.field[r];
        [x[0], x[1], v[0], v[1]][c]
    });
    TimeSeriesFrame::new(
        3600.0,
        0,
        ["T_ext1", "T_ext2", "dT_ext1", "dT_ext2"].map(String::from).to_vec(),
        values,
    )
}

/// All trajectories side by side as `traj<i>_T_ext1`, `traj<i>_T_ext2`.
pub fn trajectories_frame(p: &Portrait) -> Result<TimeSeriesFrame> {
    let renamed = p
        .trajectories
        .iter()
        .enumerate()
        .map(|(i, t)| t.with_channels(vec![format!("traj{i}_T_ext1"), format!("traj{i}_T_ext2")]))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&TimeSeriesFrame> = renamed.iter().collect();
    TimeSeriesFrame::hstack(&refs)
}

const PANEL: f64 = 420.0;
const MARGIN: f64 = 50.0;

/// Side-by-side SVG panels sharing the request's axes.
pub fn render_svg(portraits: &[Portrait], req: &PortraitRequest) -> String {
    let width = PANEL * portraits.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL:.0}" viewBox="0 0 {width:.0} {PANEL:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{width:.0}" height="{PANEL:.0}" fill="white"/>"#);
    let inner = PANEL - 2.0 * MARGIN;
    let spacing = inner / (req.resolution - 1) as f64;
    for (k, p) in portraits.iter().enumerate() {
        let ox = k as f64 * PANEL + MARGIN;
        let sx = |v: f64| ox + (v - req.t1_range[0]) / (req.t1_range[1] - req.t1_range[0]) * inner;
        let sy = |v: f64| MARGIN + inner - (v - req.t2_range[0]) / (req.t2_range[1] - req.t2_range[0]) * inner;
        let title = match p.operator {
            OperatorSource::Physics => "physics: dx/dt = A x",
            OperatorSource::Dmd => "DMD: dx/dt = (Phi - I) x / dt",
        };
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{title}</text>"#, ox + inner / 2.0, MARGIN - 20.0);
        let _ = writeln!(
            svg,
            r##"<rect x="{ox:.1}" y="{MARGIN:.1}" width="{inner:.1}" height="{inner:.1}" fill="none" stroke="#888"/>"##
        );
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">T_ext1 (°C)</text>"#, ox + inner / 2.0, PANEL - 12.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">T_ext2 (°C)</text>"#,
            ox - 32.0,
            MARGIN + inner / 2.0,
            ox - 32.0,
            MARGIN + inner / 2.0
        );
        for (v, anchor, x, y) in [
            (req.t1_range[0], "start", sx(req.t1_range[0]), MARGIN + inner + 14.0),
            (req.t1_range[1], "end", sx(req.t1_range[1]), MARGIN + inner + 14.0),
        ] {
            let _ = writeln!(svg, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}">{v}</text>"#);
        }
        for (v, y) in [(req.t2_range[0], sy(req.t2_range[0])), (req.t2_range[1], sy(req.t2_range[1]) + 10.0)] {
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{v}</text>"#, ox - 4.0);
        }

        let max = p
            .field
            .iter()
            .map(|(_, v)| v[0].hypot(v[1]))
            .fold(0.0, f64::max);
        for (x, v) in &p.field {
            let mag = v[0].hypot(v[1]);
            if mag == 0.0 || max == 0.0 {
                let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="black"/>"#, sx(x[0]), sy(x[1]));
                continue;
            }
            // sqrt compresses the dynamic range so slow regions stay visible
            let len = 0.85 * spacing * (mag / max).sqrt();
            let (ux, uy) = (v[0] / mag, -v[1] / mag);
            let (x0, y0) = (sx(x[0]), sy(x[1]));
            let (x1, y1) = (x0 + ux * len, y0 + uy * len);
            let head = 0.3 * len;
            let (hx1, hy1) = (x1 - head * (ux * 0.87 - uy * 0.5), y1 - head * (uy * 0.87 + ux * 0.5));
            let (hx2, hy2) = (x1 - head * (ux * 0.87 + uy * 0.5), y1 - head * (uy * 0.87 - ux * 0.5));
            let _ = writeln!(
                svg,
                r##"<path d="M{x0:.2},{y0:.2} L{x1:.2},{y1:.2} M{hx1:.2},{hy1:.2} L{x1:.2},{y1:.2} L{hx2:.2},{hy2:.2}" stroke="#3b6ea8" fill="none" stroke-width="1"/>"##
            );
        }
        for t in &p.trajectories {
            let pts: Vec<String> = (0..t.len())
                .map(|r| format!("{:.2},{:.2}", sx(t.values()[(r, 0)]), sy(t.values()[(r, 1)])))
                .collect();
            let _ = writeln!(
                svg,
                r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="1.5"/>"##,
                pts.join(" ")
            );
            let _ = writeln!(
                svg,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#c0392b"/>"##,
                sx(t.values()[(0, 0)]),
                sy(t.values()[(0, 1)])
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
