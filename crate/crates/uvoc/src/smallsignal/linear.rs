//! Linearized state-space model, its partitions, and eigenvalue analysis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::smallsignal::model::{
    analytic_jacobian, nonlinear_f, GridCondition, Mode, OperatingPoint, SmallSignalParams,
};

/// Linearization around an operating point. State ordering
/// `[ΔI_d, ΔI_q, ΔV, Δθ_s, Δv_dc]`, input ordering `[ΔP0, ΔQ0]`.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub operating_point: OperatingPoint,
}

impl LinearModel {
    /// AC-side block with the bus row and column removed.
    pub fn a11(&self) -> DMatrix<f64> {
        self.a.view((0, 0), (4, 4)).into_owned()
    }

    pub fn a12(&self) -> DMatrix<f64> {
        self.a.view((0, 4), (4, 1)).into_owned()
    }

    pub fn a21(&self) -> DMatrix<f64> {
        self.a.view((4, 0), (1, 4)).into_owned()
    }

    pub fn a22(&self) -> f64 {
        self.a[(4, 4)]
    }

    pub fn b11(&self) -> DMatrix<f64> {
        self.b.view((0, 0), (4, 2)).into_owned()
    }

    pub fn b21(&self) -> DMatrix<f64> {
        self.b.view((4, 0), (1, 2)).into_owned()
    }
}

const LINEARIZE_RESIDUAL_TOL: f64 = 1e-8;

/// Build the linear model at a solved operating point. Points whose model
/// residual exceeds the tolerance are rejected.
pub fn linearize(
    op: &OperatingPoint,
    p: &SmallSignalParams,
    mode: &Mode,
) -> Result<LinearModel> {
    let u = [p.svo.p0, p.svo.q0];
    let mut pp = p.clone();
    pp.p_dc = op.p_dc;
    let f = nonlinear_f(&op.state(), &u, &pp, &op.grid, mode);
    let residual = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if residual > LINEARIZE_RESIDUAL_TOL {
        return Err(Error::Infeasible(format!(
            "not an equilibrium: residual {residual:.3e} exceeds {LINEARIZE_RESIDUAL_TOL:.0e}"
        )));
    }
    let (a, b) = analytic_jacobian(&op.state(), &u, &pp, &op.grid, mode);
    Ok(LinearModel { a, b, operating_point: *op })
}

/// Full complex spectrum, sorted by real part descending, then imaginary
/// part descending.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let mut eigs: Vec<Complex64> = m.clone().complex_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    eigs
}

/// Convenience: solve the equilibrium and linearize in one call.
pub fn linearize_at(
    p: &SmallSignalParams,
    grid: &GridCondition,
    mode: &Mode,
) -> Result<LinearModel> {
    let op = crate::smallsignal::model::equilibrium_solve(p, grid, mode)?;
    linearize(&op, p, mode)
}
