//! Cell-centered uniform grids, midpoint quadrature, Neumann finite differences
//! and the cosine potential in both physical and rescaled variables.

use crate::error::{MfgError, Result};

/// Uniform cell-centered mesh on `[-L, L]`.
///
/// Nodes sit at `x_i = -L + (i + 1/2) h` with `h = 2L / n`, so every node has a
/// mirror partner `x_{n-1-i} = -x_i` and no node falls exactly on 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    half_width: f64,
    n_cells: usize,
}

impl Grid1D {
    pub fn new(half_width: f64, n_cells: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(MfgError::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if n_cells < 8 || !n_cells.is_multiple_of(2) {
            return Err(MfgError::InvalidGrid(format!(
                "cell count must be even and at least 8, got {n_cells}"
            )));
        }
        Ok(Self { half_width, n_cells })
    }

    /// Grid on the physical circle `[-π, π]`.
    pub fn physical(n_cells: usize) -> Result<Self> {
        Self::new(std::f64::consts::PI, n_cells)
    }

    /// Grid on the stretched domain `[-πκ^{1/4}, πκ^{1/4}]` with the same cell count.
    pub fn rescaled(n_cells: usize, kappa: f64) -> Result<Self> {
        Self::new(std::f64::consts::PI * kappa.powf(0.25), n_cells)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.node(i)).collect()
    }

    /// Midpoint quadrature weights; all equal to `h`.
    pub fn weights(&self) -> Vec<f64> {
        vec![self.spacing(); self.n_cells]
    }

    /// Index of the node just right of the origin. Used for the `u(0) = 0` gauge.
    pub fn center_index(&self) -> usize {
        self.n_cells / 2
    }

    /// Left boundary of cell face `f` (face `0` is `-L`, face `n` is `L`).
    pub fn face(&self, f: usize) -> f64 {
        -self.half_width + f as f64 * self.spacing()
    }

    /// Builds a field by evaluating `f` at every node.
    pub fn sample(&self, parity: Parity, f: impl Fn(f64) -> f64) -> ScalarField {
        let values = (0..self.n_cells).map(|i| f(self.node(i))).collect();
        ScalarField { grid: *self, values, parity }
    }
}

/// Same as [`Grid1D::new`].
pub fn make_grid(half_width: f64, n_cells: usize) -> Result<Grid1D> {
    Grid1D::new(half_width, n_cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::None => "none",
        }
    }

    fn flipped(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
            Parity::None => Parity::None,
        }
    }
}

/// Relative tolerance used when checking a parity tag on construction.
pub const PARITY_TOL: f64 = 1e-12;

/// Grid function with an optional symmetry tag.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid1D,
    values: Vec<f64>,
    parity: Parity,
}

impl ScalarField {
    /// Checked constructor. A parity tag is verified against [`PARITY_TOL`]
    /// relative to the field's sup norm.
    pub fn new(grid: Grid1D, values: Vec<f64>, parity: Parity) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(MfgError::LengthMismatch {
                expected: grid.n_cells(),
                got: values.len(),
            });
        }
        let field = Self { grid, values, parity };
        let defect = field.parity_defect();
        let scale = field.sup_norm().max(f64::MIN_POSITIVE);
        if defect > PARITY_TOL * scale {
            return Err(MfgError::ParityViolation {
                parity: parity.name(),
                defect,
            });
        }
        Ok(field)
    }

    /// Builds the field and forces the tagged symmetry by averaging mirror pairs.
    pub fn symmetrized(grid: Grid1D, mut values: Vec<f64>, parity: Parity) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(MfgError::LengthMismatch {
                expected: grid.n_cells(),
                got: values.len(),
            });
        }
        symmetrize_in_place(&mut values, parity);
        Ok(Self { grid, values, parity })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![0.0; grid.n_cells()], parity: Parity::Even }
    }

    pub fn constant(grid: Grid1D, c: f64) -> Self {
        Self { grid, values: vec![c; grid.n_cells()], parity: Parity::Even }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Largest mismatch between mirror nodes for the tagged symmetry (0 for `None`).
    pub fn parity_defect(&self) -> f64 {
        let n = self.values.len();
        let sign = match self.parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
            Parity::None => return 0.0,
        };
        (0..n / 2)
            .map(|i| (self.values[i] - sign * self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, parity: Parity, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            parity,
        }
    }

    /// Node-wise product; parities multiply.
    pub fn mul(&self, other: &Self) -> Self {
        let parity = match (self.parity, other.parity) {
            (Parity::Even, Parity::Even) | (Parity::Odd, Parity::Odd) => Parity::Even,
            (Parity::Even, Parity::Odd) | (Parity::Odd, Parity::Even) => Parity::Odd,
            _ => Parity::None,
        };
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            parity,
        }
    }
}

pub(crate) fn symmetrize_in_place(values: &mut [f64], parity: Parity) {
    let n = values.len();
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
        Parity::None => return,
    };
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let avg = 0.5 * (values[i] + sign * values[j]);
        values[i] = avg;
        values[j] = sign * avg;
    }
}

/// Midpoint rule.
pub fn integrate(f: &ScalarField) -> f64 {
    integrate_values(&f.grid, &f.values)
}

pub(crate) fn integrate_values(grid: &Grid1D, values: &[f64]) -> f64 {
    grid.spacing() * pairwise_sum(values)
}

/// Pairwise summation; deterministic and with `O(log n)` error growth.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Centered first derivative with reflected ghost cells (`f_{-1} = f_0`, `f_n = f_{n-1}`).
pub fn diff_neumann(f: &ScalarField) -> ScalarField {
    ScalarField {
        grid: f.grid,
        values: diff_values(&f.grid, &f.values),
        parity: f.parity.flipped(),
    }
}

pub(crate) fn diff_values(grid: &Grid1D, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let inv = 0.5 / grid.spacing();
    (0..n)
        .map(|i| {
            let left = if i == 0 { f[0] } else { f[i - 1] };
            let right = if i + 1 == n { f[n - 1] } else { f[i + 1] };
            (right - left) * inv
        })
        .collect()
}

/// Second difference with the same reflected ghost cells; the negative of the
/// Neumann matrix used by the eigensolver and the parabolic steps.
pub fn laplacian_neumann(f: &ScalarField) -> ScalarField {
    ScalarField {
        grid: f.grid,
        values: laplacian_values(&f.grid, &f.values),
        parity: f.parity,
    }
}

pub(crate) fn laplacian_values(grid: &Grid1D, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let inv = 1.0 / (grid.spacing() * grid.spacing());
    (0..n)
        .map(|i| {
            let left = if i == 0 { f[0] } else { f[i - 1] };
            let right = if i + 1 == n { f[n - 1] } else { f[i + 1] };
            (left - 2.0 * f[i] + right) * inv
        })
        .collect()
}

/// `V(x) = 1 - cos x`, evaluated as `2 sin²(x/2)` to keep full relative accuracy near 0.
pub fn potential(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// `V_κ(x) = κ^{1/2} V(x κ^{-1/4})`.
pub fn potential_rescaled(x: f64, kappa: f64) -> f64 {
    kappa.sqrt() * potential(x * kappa.powf(-0.25))
}

/// Potential on `grid`, either `V` or the rescaled `V_κ`.
pub fn eval_potential(grid: Grid1D, rescaled: bool, kappa: f64) -> Result<ScalarField> {
    if rescaled {
        if !(kappa >= 1.0) {
            return Err(MfgError::Precondition(format!(
                "rescaled potential needs kappa >= 1, got {kappa}"
            )));
        }
        Ok(grid.sample(Parity::Even, |x| potential_rescaled(x, kappa)))
    } else {
        Ok(grid.sample(Parity::Even, potential))
    }
}
