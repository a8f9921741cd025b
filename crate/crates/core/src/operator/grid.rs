use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Radial grid for a block of spherical sectors with fixed `m_z`.
///
/// Nodes are `r_k = r_min + k h`, `k = 1..=n`, `h = (r_max - r_min)/(n + 1)`;
/// the end points carry the Dirichlet condition. Unknowns are ordered
/// `l_index * n + (k - 1)` for `l = l..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    pub m_z: i32,
    pub l: usize,
    pub l_max: usize,
}

/// Uniform box `lo..hi` with `n` interior nodes per axis, Dirichlet faces.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianGrid {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Sector(SectorGrid),
    Cartesian(CartesianGrid),
}

/// Largest dense Cartesian problem.
pub const CARTESIAN_MAX_NODES: usize = 4096;

impl SectorGrid {
    pub fn h(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n + 1) as f64
    }

    /// Node `k` in `0..=n+1`; `0` and `n + 1` are the boundary points.
    pub fn r(&self, k: usize) -> f64 {
        self.r_min + k as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.n).map(|k| self.r(k)).collect()
    }

    pub fn ls(&self) -> std::ops::RangeInclusive<usize> {
        self.l..=self.l_max
    }

    pub fn n_l(&self) -> usize {
        self.l_max + 1 - self.l
    }

    pub fn dim(&self) -> usize {
        self.n * self.n_l()
    }

    pub fn index(&self, l_index: usize, k: usize) -> usize {
        l_index * self.n + (k - 1)
    }
}

impl CartesianGrid {
    pub fn h(&self) -> [f64; 3] {
        std::array::from_fn(|a| (self.hi[a] - self.lo[a]) / (self.n + 1) as f64)
    }

    /// Coordinate of node `k` in `0..=n+1` along axis `a`.
    pub fn coord(&self, a: usize, k: usize) -> f64 {
        self.lo[a] + k as f64 * self.h()[a]
    }

    pub fn dim(&self) -> usize {
        self.n.pow(3)
    }

    /// Flat index of interior node `(i, j, k)`, each in `1..=n`.
    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ((ijk[0] - 1) * self.n + (ijk[1] - 1)) * self.n + (ijk[2] - 1)
    }

    pub fn point(&self, ijk: [usize; 3]) -> [f64; 4] {
        [0.0, self.coord(0, ijk[0]), self.coord(1, ijk[1]), self.coord(2, ijk[2])]
    }

    pub fn interior(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let n = self.n;
        (1..=n).flat_map(move |i| (1..=n).flat_map(move |j| (1..=n).map(move |k| [i, j, k])))
    }
}

impl GridSpec {
    /// Sector grid with the default angular block `l..=|m_z| + 4`.
    pub fn sector(r_min: f64, r_max: f64, n: usize, l: usize, m_z: i32) -> Result<Self> {
        let l_max = (m_z.unsigned_abs() as usize + 4).max(l);
        Self::sector_block(r_min, r_max, n, l, m_z, l_max)
    }

    /// Sector grid carrying exactly one `l`.
    pub fn single_sector(r_min: f64, r_max: f64, n: usize, l: usize, m_z: i32) -> Result<Self> {
        Self::sector_block(r_min, r_max, n, l, m_z, l)
    }

    pub fn sector_block(r_min: f64, r_max: f64, n: usize, l: usize, m_z: i32, l_max: usize) -> Result<Self> {
        let g = GridSpec::Sector(SectorGrid { r_min, r_max, n, m_z, l, l_max });
        g.validate()?;
        Ok(g)
    }

    pub fn cartesian(lo: [f64; 3], hi: [f64; 3], n: usize) -> Result<Self> {
        let g = GridSpec::Cartesian(CartesianGrid { lo, hi, n });
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GridSpec::Sector(s) => {
                if s.n < 16 {
                    return Err(Error::Config(format!("sector grid needs n >= 16, got {}", s.n)));
                }
                if !(s.r_min > 0.0 && s.r_max > s.r_min && s.r_max.is_finite()) {
                    return Err(Error::Config(format!(
                        "sector grid needs 0 < r_min < r_max, got [{}, {}]",
                        s.r_min, s.r_max
                    )));
                }
                if (s.l as i64) < s.m_z.abs() as i64 {
                    return Err(Error::Config(format!("l = {} is below |m_z| = {}", s.l, s.m_z.abs())));
                }
                if s.l_max < s.l {
                    return Err(Error::Config(format!("l_max = {} is below l = {}", s.l_max, s.l)));
                }
            }
            GridSpec::Cartesian(c) => {
                if c.n < 3 || c.dim() > CARTESIAN_MAX_NODES {
                    return Err(Error::Config(format!(
                        "cartesian grid needs 3 <= n and n^3 <= {CARTESIAN_MAX_NODES}, got n = {}",
                        c.n
                    )));
                }
                if (0..3).any(|a| !(c.hi[a] > c.lo[a])) {
                    return Err(Error::Config("cartesian box needs lo < hi on every axis".into()));
                }
            }
        }
        Ok(())
    }

    /// Unknowns per component.
    pub fn dim(&self) -> usize {
        match self {
            GridSpec::Sector(s) => s.dim(),
            GridSpec::Cartesian(c) => c.dim(),
        }
    }

    /// Quadrature weight of one unknown, so that `sum w |u|^2` is the norm.
    pub fn cell_volume(&self) -> f64 {
        match self {
            GridSpec::Sector(s) => s.h(),
            GridSpec::Cartesian(c) => c.h().iter().product(),
        }
    }

    pub fn as_sector(&self) -> Result<&SectorGrid> {
        match self {
            GridSpec::Sector(s) => Ok(s),
            GridSpec::Cartesian(_) => Err(Error::UnsupportedGrid("operation needs a radial-sector grid".into())),
        }
    }

    /// Position of every unknown along `axis` (radius for sector grids,
    /// where only axis 0 exists).
    pub fn positions(&self, axis: usize) -> Result<DVector<f64>> {
        match self {
            GridSpec::Sector(s) => {
                if axis != 0 {
                    return Err(Error::DimensionMismatch("sector grids have one position axis".into()));
                }
                Ok(DVector::from_fn(s.dim(), |i, _| s.r(i % s.n + 1)))
            }
            GridSpec::Cartesian(c) => {
                if axis > 2 {
                    return Err(Error::DimensionMismatch(format!("axis {axis} out of range")));
                }
                let mut v = DVector::zeros(c.dim());
                for ijk in c.interior() {
                    v[c.index(ijk)] = c.coord(axis, ijk[axis]);
                }
                Ok(v)
            }
        }
    }

    pub fn axes(&self) -> usize {
        match self {
            GridSpec::Sector(_) => 1,
            GridSpec::Cartesian(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Components {
    Scalar,
    /// `2 x 2` blocks in component space, ordered `(upper, lower)`.
    TwoComponent,
}

/// Matrix `re + i im` on a grid. A missing imaginary part is zero.
#[derive(Debug, Clone)]
pub struct GridOperator {
    pub re: DMatrix<f64>,
    pub im: Option<DMatrix<f64>>,
    pub components: Components,
    pub grid: GridSpec,
}

fn kron2(m: &[[f64; 2]; 2], a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for bi in 0..2 {
        for bj in 0..2 {
            if m[bi][bj] != 0.0 {
                out.view_mut((bi * n, bj * n), (n, n)).copy_from(&(a * m[bi][bj]));
            }
        }
    }
    out
}

impl GridOperator {
    pub fn real(re: DMatrix<f64>, grid: GridSpec) -> Self {
        Self { re, im: None, components: Components::Scalar, grid }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.dim();
        Self::real(DMatrix::zeros(n, n), grid)
    }

    pub fn identity(grid: GridSpec) -> Self {
        let n = grid.dim();
        Self::real(DMatrix::identity(n, n), grid)
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_none()
    }

    fn im_or_zero(&self) -> DMatrix<f64> {
        self.im.clone().unwrap_or_else(|| DMatrix::zeros(self.dim(), self.dim()))
    }

    pub fn norm(&self) -> f64 {
        let im = self.im.as_ref().map_or(0.0, |m| m.norm_squared());
        (self.re.norm_squared() + im).sqrt()
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        Self {
            re: self.re.transpose(),
            im: self.im.as_ref().map(|m| -m.transpose()),
            components: self.components,
            grid: self.grid.clone(),
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() || self.components != other.components {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} {:?} vs {}x{} {:?}",
                self.dim(),
                self.dim(),
                self.components,
                other.dim(),
                other.dim(),
                other.components
            )));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        self.check_same(other)?;
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            (a, b) => {
                let z = || DMatrix::zeros(self.dim(), self.dim());
                Some(a.clone().unwrap_or_else(z) + b.clone().unwrap_or_else(z) * sign)
            }
        };
        Ok(Self { re: &self.re + &other.re * sign, im, components: self.components, grid: self.grid.clone() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut re = &self.re * &other.re;
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            (Some(a), None) => Some(a * &other.re),
            (None, Some(b)) => Some(&self.re * b),
            (Some(a), Some(b)) => {
                re -= a * b;
                Some(a * &other.re + &self.re * b)
            }
        };
        Ok(Self { re, im, components: self.components, grid: self.grid.clone() })
    }

    /// Multiplication by the complex number `a + i b`.
    pub fn scale(&self, a: f64, b: f64) -> Self {
        let im0 = self.im_or_zero();
        let re = &self.re * a - &im0 * b;
        let im = &self.re * b + &im0 * a;
        let im = if im.iter().all(|v| *v == 0.0) { None } else { Some(im) };
        Self { re, im, components: self.components, grid: self.grid.clone() }
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.add(&other.matmul(self)?)
    }

    /// `P (x) self` for a real `2 x 2` matrix `P` in component space.
    pub fn lift(&self, p: [[f64; 2]; 2]) -> Result<Self> {
        if self.components != Components::Scalar {
            return Err(Error::DimensionMismatch("lift needs a scalar operator".into()));
        }
        Ok(Self {
            re: kron2(&p, &self.re),
            im: self.im.as_ref().map(|m| kron2(&p, m)),
            components: Components::TwoComponent,
            grid: self.grid.clone(),
        })
    }

    /// Block `(i, j)` of a two-component operator.
    pub fn block(&self, i: usize, j: usize) -> Result<Self> {
        if self.components != Components::TwoComponent {
            return Err(Error::DimensionMismatch("block needs a two-component operator".into()));
        }
        let n = self.dim() / 2;
        let take = |m: &DMatrix<f64>| m.view((i * n, j * n), (n, n)).into_owned();
        Ok(Self {
            re: take(&self.re),
            im: self.im.as_ref().map(take),
            components: Components::Scalar,
            grid: self.grid.clone(),
        })
    }

    /// Pauli matrix `rho_i` in component space on this grid.
    pub fn rho(i: usize, grid: &GridSpec) -> Result<Self> {
        let id = Self::identity(grid.clone());
        match i {
            1 => id.lift([[0.0, 1.0], [1.0, 0.0]]),
            2 => Ok(id.lift([[0.0, 1.0], [-1.0, 0.0]])?.scale(0.0, -1.0)),
            3 => id.lift([[1.0, 0.0], [0.0, -1.0]]),
            _ => Err(Error::DimensionMismatch(format!("no Pauli matrix rho_{i}"))),
        }
    }

    /// `||rho_3 H^dagger rho_3 - H||_F / ||H||_F`.
    pub fn pseudo_hermiticity_defect(&self) -> Result<f64> {
        let rho3 = Self::rho(3, &self.grid)?;
        let mirrored = rho3.matmul(&self.adjoint())?.matmul(&rho3)?;
        let norm = self.norm();
        Ok(if norm == 0.0 { 0.0 } else { mirrored.sub(self)?.norm() / norm })
    }

    /// `||H^dagger - H||_F / ||H||_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.adjoint().sub(self).expect("same shape").norm();
        let n = self.norm();
        if n == 0.0 {
            0.0
        } else {
            d / n
        }
    }

    /// Applies the operator to `a + i b`.
    pub fn apply(&self, a: &DVector<f64>, b: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let mut re = &self.re * a;
        let mut im = &self.re * b;
        if let Some(m) = &self.im {
            re -= m * b;
            im += m * a;
        }
        (re, im)
    }
}
