//! Lumped 3R2C wall model: first-principles RC parameters, the two-node heat
//! balance in state-space form, and its exact zero-order-hold discretization.
//!
//! State order is `(T_ext1, T_ext2)`: `T_ext1` is the interior-side node and
//! `T_ext2` the exterior-side node that exchanges heat with outdoor air.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix};
use crate::rom::{Subspace, SubspaceOrigin};

/// Exterior film coefficient (W/m²K) implied by the reference 0.2 m system
/// matrix: its (2,2) entry requires `U_out = 180 W/K` on a 9 m² face.
pub const CALIBRATED_H_OUT: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSpec {
    /// W/(m·K)
    pub conductivity: f64,
    /// kg/m³
    pub density: f64,
    /// J/(kg·K)
    pub specific_heat: f64,
}

impl MaterialSpec {
    pub const RED_BRICK: MaterialSpec = MaterialSpec {
        conductivity: 0.72,
        density: 1920.0,
        specific_heat: 780.0,
    };

    pub const CONCRETE: MaterialSpec = MaterialSpec {
        conductivity: 1.3,
        density: 2240.0,
        specific_heat: 840.0,
    };

    /// Thermal diffusivity k/(ρ·Cp) in m²/s.
    pub fn diffusivity(&self) -> f64 {
        self.conductivity / (self.density * self.specific_heat)
    }

    pub fn validate(&self) -> Result<()> {
        positive("conductivity", self.conductivity)?;
        positive("density", self.density)?;
        positive("specific_heat", self.specific_heat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallSpec {
    /// m
    pub thickness: f64,
    /// m³
    pub layer_volume: f64,
    pub material: MaterialSpec,
    /// W/(m²·K)
    pub h_out: f64,
    /// W/(m²·K)
    pub h_in: f64,
    pub indoor_branch: bool,
}

impl Default for WallSpec {
    fn default() -> Self {
        WallSpec {
            thickness: 0.2,
            layer_volume: 1.8,
            material: MaterialSpec::RED_BRICK,
            h_out: 25.0,
            h_in: 8.0,
            indoor_branch: false,
        }
    }
}

impl WallSpec {
    /// Red-brick wall of the given thickness with the default layer volume.
    pub fn brick(thickness: f64) -> Self {
        WallSpec {
            thickness,
            ..WallSpec::default()
        }
    }

    pub fn with_material(mut self, material: MaterialSpec) -> Self {
        self.material = material;
        self
    }

    pub fn with_h_out(mut self, h_out: f64) -> Self {
        self.h_out = h_out;
        self
    }

    pub fn face_area(&self) -> f64 {
        self.layer_volume / self.thickness
    }

    pub fn validate(&self) -> Result<()> {
        positive("thickness", self.thickness)?;
        positive("layer_volume", self.layer_volume)?;
        positive("h_out", self.h_out)?;
        if self.indoor_branch {
            positive("h_in", self.h_in)?;
        }
        self.material.validate()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
    }
}

/// Capacitances in J/K, conductances (reciprocal resistances) in W/K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcParameters {
    pub c_ext1: f64,
    pub c_ext2: f64,
    /// `1 / R_ext2_ext1`
    pub u_cond: f64,
    /// `1 / R_ext_ext2`
    pub u_out: f64,
    /// `1 / R_ext1_int`, present only with the indoor branch.
    pub u_in: Option<f64>,
    /// Constant heat gains per node in W, zero by default.
    pub gains: [f64; 2],
}

impl RcParameters {
    pub fn r_cond(&self) -> f64 {
        1.0 / self.u_cond
    }

    pub fn r_out(&self) -> f64 {
        1.0 / self.u_out
    }

    pub fn validate(&self) -> Result<()> {
        positive("c_ext1", self.c_ext1)?;
        positive("c_ext2", self.c_ext2)?;
        positive("u_cond", self.u_cond)?;
        if !(self.u_out >= 0.0 && self.u_out.is_finite()) {
            return Err(Error::invalid("u_out", "must be non-negative"));
        }
        if let Some(u) = self.u_in {
            positive("u_in", u)?;
        }
        if !self.gains.iter().all(|g| g.is_finite()) {
            return Err(Error::invalid("gains", "must be finite"));
        }
        Ok(())
    }
}

/// Node capacitance `Cp·ρ·V`, conductance `k·A/w` across the wall and film
/// conductances `h·A`, with `A = V/w`.
pub fn derive_rc(spec: &WallSpec) -> Result<RcParameters> {
    spec.validate()?;
    let area = spec.face_area();
    let m = &spec.material;
    let c = m.specific_heat * m.density * spec.layer_volume;
    Ok(RcParameters {
        c_ext1: c,
        c_ext2: c,
        u_cond: m.conductivity * area / spec.thickness,
        u_out: spec.h_out * area,
        u_in: spec.indoor_branch.then_some(spec.h_in * area),
        gains: [0.0; 2],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    pub state_names: Vec<String>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl StateSpaceModel {
    /// Builds a model from explicitly supplied matrices, bypassing the RC
    /// derivation. Output is `T_ext1`, states `(T_ext1, T_ext2)`, inputs
    /// named `u0, u1, …` unless there is exactly one (`T_ext`).
    pub fn from_matrices(a: Matrix, b: Matrix) -> Result<Self> {
        let n = a.nrows();
        let p = b.ncols();
        let state_names = if n == 2 {
            names(&["T_ext1", "T_ext2"])
        } else {
            (0..n).map(|i| format!("x{i}")).collect()
        };
        let input_names = if p == 1 {
            names(&["T_ext"])
        } else {
            (0..p).map(|i| format!("u{i}")).collect()
        };
        let mut c = Matrix::zeros(1, n);
        if n > 0 {
            c[(0, 0)] = 1.0;
        }
        let output_names = vec![state_names.first().cloned().unwrap_or_default()];
        let ssm = StateSpaceModel {
            a,
            b,
            c,
            d: Matrix::zeros(1, p),
            state_names,
            input_names,
            output_names,
        };
        ssm.validate()?;
        Ok(ssm)
    }

    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.nrows();
        if !self.a.is_square() {
            return Err(Error::NotSquare {
                rows: self.a.nrows(),
                cols: self.a.ncols(),
            });
        }
        let p = self.b.ncols();
        let q = self.c.nrows();
        let dims = [
            ("B rows", n, self.b.nrows()),
            ("C cols", n, self.c.ncols()),
            ("D rows", q, self.d.nrows()),
            ("D cols", p, self.d.ncols()),
            ("state names", n, self.state_names.len()),
            ("input names", p, self.input_names.len()),
            ("output names", q, self.output_names.len()),
        ];
        for (context, expected, got) in dims {
            if expected != got {
                return Err(Error::Dimension {
                    context,
                    expected,
                    got,
                });
            }
        }
        for (m, what) in [
            (&self.a, "A"),
            (&self.b, "B"),
            (&self.c, "C"),
            (&self.d, "D"),
        ] {
            numerics::ensure_finite(m, what)?;
        }
        Ok(())
    }
}

/// Assembles the two-node heat balance as `ẋ = A·x + B·u`, `y = T_ext1`.
///
/// Inputs are `T_ext` and, with the indoor branch, `T_int`. Non-zero node
/// gains add a constant unit input `Q` whose column is `gains / C`.
pub fn build_ssm(rc: &RcParameters) -> Result<StateSpaceModel> {
    rc.validate()?;
    let (c1, c2) = (rc.c_ext1, rc.c_ext2);
    let u = rc.u_cond;
    let mut a = Matrix::from_row_slice(2, 2, &[-u / c1, u / c1, u / c2, -(u + rc.u_out) / c2]);
    let mut columns = vec![vec![0.0, rc.u_out / c2]];
    let mut input_names = names(&["T_ext"]);
    if let Some(u_in) = rc.u_in {
        a[(0, 0)] -= u_in / c1;
        columns.push(vec![u_in / c1, 0.0]);
        input_names.push("T_int".into());
    }
    if rc.gains.iter().any(|&g| g != 0.0) {
        columns.push(vec![rc.gains[0] / c1, rc.gains[1] / c2]);
        input_names.push("Q".into());
    }
    let b = Matrix::from_fn(2, columns.len(), |r, c| columns[c][r]);
    let p = b.ncols();
    let ssm = StateSpaceModel {
        a,
        b,
        c: Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
        d: Matrix::zeros(1, p),
        state_names: names(&["T_ext1", "T_ext2"]),
        input_names,
        output_names: names(&["T_ext1"]),
    };
    ssm.validate()?;
    Ok(ssm)
}

/// Convenience: `build_ssm(derive_rc(spec))`.
pub fn wall_ssm(spec: &WallSpec) -> Result<StateSpaceModel> {
    build_ssm(&derive_rc(spec)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSSM {
    pub phi: Matrix,
    pub gamma: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    /// seconds
    pub dt: f64,
    pub state_names: Vec<String>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
}

impl DiscreteSSM {
    pub fn n_states(&self) -> usize {
        self.phi.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.gamma.ncols()
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(numerics::eig(&self.phi)?
            .eigenvalues
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max))
    }

    /// Fixed point `(I − Φ)⁻¹·Γ·u` for a constant input.
    pub fn steady_state(&self, u: &[f64]) -> Result<DVector<f64>> {
        if u.len() != self.n_inputs() {
            return Err(Error::Dimension {
                context: "steady-state input",
                expected: self.n_inputs(),
                got: u.len(),
            });
        }
        let n = self.n_states();
        let lhs = Matrix::identity(n, n) - &self.phi;
        let rhs = &self.gamma * DVector::from_column_slice(u);
        lhs.lu()
            .solve(&rhs)
            .ok_or(Error::Singular("I - Phi in steady state"))
    }
}

/// Exact zero-order-hold discretization: `Φ = e^{dt·A}`, `Γ = A⁻¹(Φ − I)B`.
pub fn discretize(ssm: &StateSpaceModel, dt: f64) -> Result<DiscreteSSM> {
    ssm.validate()?;
    let phi = numerics::expm_dt(&ssm.a, dt)?;
    let n = ssm.n_states();
    let a_inv = ssm
        .a
        .clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
        .ok_or(Error::Singular("system matrix A in zero-order hold"))?;
    let gamma = a_inv * (&phi - Matrix::identity(n, n)) * &ssm.b;
    numerics::ensure_finite(&gamma, "discrete input map")?;
    Ok(DiscreteSSM {
        phi,
        gamma,
        c: ssm.c.clone(),
        d: ssm.d.clone(),
        dt,
        state_names: ssm.state_names.clone(),
        input_names: ssm.input_names.clone(),
        output_names: ssm.output_names.clone(),
    })
}

/// Eigenvectors of `A` as the physics-derived source basis.
pub fn source_subspace(ssm: &StateSpaceModel) -> Result<Subspace> {
    let e = numerics::eig(&ssm.a)?;
    let basis = e
        .real_eigenvectors()
        .ok_or(Error::ComplexModes("source subspace"))?;
    let eigenvalues = e.real_eigenvalues();
    let orthonormal = numerics::is_symmetric(&ssm.a);
    Subspace::new(basis, eigenvalues, orthonormal, SubspaceOrigin::Physics)
}
