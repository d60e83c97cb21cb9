//! Gaussian kernel density estimation of planar point clouds on a grid.
//!
//! The kernel covariance is `h² · Ĉ`, with `Ĉ` the unbiased sample
//! covariance of the cloud and `h = n^(-1/6)` Scott's factor for two
//! dimensions. Densities are sampled at cell centers and the grid is then
//! rescaled so that its Riemann sum is exactly one.
//!
//! Evaluation is a direct sum over points. Each point only touches the cells
//! inside its `q ≤ KERNEL_CUTOFF` Mahalanobis ellipse, where the kernel is
//! at least `e^-18` of its peak, and walks each row of that ellipse with a
//! multiplicative recurrence instead of calling `exp` per cell.

use alloc::vec::Vec;

use crate::embedding::{Point, PointCloud};
use crate::stats::{median_in_place, pairwise_sum};
use crate::{Error, Result};

/// Default cells per axis.
pub const DEFAULT_GRID_CELLS: usize = 128;

/// Grid margin around the cloud, in kernel standard deviations.
pub const GRID_MARGIN_BANDWIDTHS: f64 = 3.0;

/// Squared Mahalanobis radius beyond which a kernel contributes nothing.
pub const KERNEL_CUTOFF: f64 = 36.0;

/// Tolerance of the unit-integral invariant.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Rectangular evaluation grid. Cell `(j, k)` is centered at
/// `(x0 + (j + ½)·dx, y0 + (k + ½)·dy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GridSpec {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x0: f64, y0: f64, dx: f64, dy: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::param("grid origin must be finite"));
        }
        if !(dx.is_finite() && dy.is_finite() && dx > 0.0 && dy > 0.0) {
            return Err(Error::param(alloc::format!(
                "grid cell sizes must be positive (dx = {dx}, dy = {dy})"
            )));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::param(alloc::format!(
                "grid needs at least 2 cells per axis (nx = {nx}, ny = {ny})"
            )));
        }
        Ok(GridSpec { x0, y0, dx, dy, nx, ny })
    }

    /// Grid spanning `[lo, hi]` widened by `margin` on every side. An axis
    /// with zero extent gets a unit-width span centered on it instead.
    pub fn covering(lo: Point, hi: Point, margin: f64, nx: usize, ny: usize) -> Result<Self> {
        let mut origin = [0.0; 2];
        let mut cell = [0.0; 2];
        let counts = [nx, ny];
        for d in 0..2 {
            let (a, b) = if hi[d] > lo[d] {
                (lo[d] - margin, hi[d] + margin)
            } else {
                (lo[d] - 0.5, lo[d] + 0.5)
            };
            origin[d] = a;
            cell[d] = (b - a) / counts[d].max(1) as f64;
        }
        GridSpec::new(origin[0], origin[1], cell[0], cell[1], nx, ny)
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn center_x(&self, j: usize) -> f64 {
        self.x0 + (j as f64 + 0.5) * self.dx
    }

    pub fn center_y(&self, k: usize) -> f64 {
        self.y0 + (k as f64 + 0.5) * self.dy
    }

    /// Cell containing `p`, if any.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let fj = libm::floor((p[0] - self.x0) / self.dx);
        let fk = libm::floor((p[1] - self.y0) / self.dy);
        if fj < 0.0 || fk < 0.0 {
            return None;
        }
        let (j, k) = (fj as usize, fk as usize);
        // points exactly on the far edge belong to the last cell
        let j = if j == self.nx && p[0] <= self.x0 + self.nx as f64 * self.dx {
            self.nx - 1
        } else {
            j
        };
        let k = if k == self.ny && p[1] <= self.y0 + self.ny as f64 * self.dy {
            self.ny - 1
        } else {
            k
        };
        (j < self.nx && k < self.ny).then_some((j, k))
    }
}

/// Probability density sampled on a [`GridSpec`], stored row-major
/// (`values[k * nx + j]`, `k` indexing y). Always integrates to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

impl DensityGrid {
    /// Builds a grid from non-negative densities, rescaling them to unit mass.
    pub fn normalized(spec: GridSpec, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.cells() {
            return Err(Error::param(alloc::format!(
                "expected {} grid values, got {}",
                spec.cells(),
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("densities must be finite and non-negative"));
        }
        let mass = pairwise_sum(&values) * spec.cell_area();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::invalid("density grid has no mass"));
        }
        let scale = 1.0 / mass;
        values.iter_mut().for_each(|v| *v *= scale);
        Ok(DensityGrid { spec, values })
    }

    /// Uniform density over the whole grid.
    pub fn uniform(spec: GridSpec) -> Self {
        let v = 1.0 / (spec.cells() as f64 * spec.cell_area());
        DensityGrid {
            spec,
            values: alloc::vec![v; spec.cells()],
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, j: usize, k: usize) -> f64 {
        self.values[k * self.spec.nx + j]
    }

    /// Riemann sum `Σ p · dx · dy`.
    pub fn integral(&self) -> f64 {
        pairwise_sum(&self.values) * self.spec.cell_area()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Per-cell probability masses `p · dx · dy`.
    pub fn masses(&self) -> Vec<f64> {
        let a = self.spec.cell_area();
        self.values.iter().map(|v| v * a).collect()
    }

    /// Index `(j, k)` of the densest cell (first one on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        (best % self.spec.nx, best / self.spec.nx)
    }
}

/// Scott's bandwidth factor `n^(-1/(d+4))`.
pub fn scott_bandwidth(n: usize, d: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::param(alloc::format!(
            "Scott's rule needs at least 2 points, got {n}"
        )));
    }
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    Ok(libm::pow(n as f64, -1.0 / (d as f64 + 4.0)))
}

/// Unbiased (n − 1) sample covariance as `[sxx, sxy, syy]`.
fn sample_covariance(points: &[Point]) -> [f64; 3] {
    let n = points.len() as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for p in points {
        mx += p[0];
        my += p[1];
    }
    mx /= n;
    my /= n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (u, v) = (p[0] - mx, p[1] - my);
        sxx += u * u;
        sxy += u * v;
        syy += v * v;
    }
    let dof = n - 1.0;
    [sxx / dof, sxy / dof, syy / dof]
}

fn eigenvalues(c: [f64; 3]) -> (f64, f64) {
    let tr = c[0] + c[2];
    let det = c[0] * c[2] - c[1] * c[1];
    let disc = libm::sqrt(((c[0] - c[2]) * (c[0] - c[2]) * 0.25 + c[1] * c[1]).max(0.0));
    let hi = 0.5 * tr + disc;
    // the small root from det/hi is stable when the roots differ greatly
    let lo = if hi > 0.0 { det / hi } else { 0.5 * tr - disc };
    (lo, hi)
}

/// Adds `ε = 1e-9·(tr Ĉ + 1)` to the diagonal when the smaller eigenvalue
/// falls below `ε`, so collinear or constant clouds stay invertible.
fn regularize(c: [f64; 3]) -> [f64; 3] {
    let eps = 1e-9 * (c[0] + c[2] + 1.0);
    let (lo, _) = eigenvalues(c);
    if lo < eps {
        [c[0] + eps, c[1], c[2] + eps]
    } else {
        c
    }
}

/// Kernel covariance `h²·Ĉ` (ridge-regularized) for a cloud of ≥ 2 points.
fn kernel_covariance(points: &[Point]) -> Result<([f64; 3], f64)> {
    let h = scott_bandwidth(points.len(), 2)?;
    let c = regularize(sample_covariance(points));
    let h2 = h * h;
    Ok(([h2 * c[0], h2 * c[1], h2 * c[2]], h))
}

/// A fitted Gaussian KDE: the data plus its kernel covariance.
#[derive(Debug, Clone)]
pub struct GaussianKde {
    points: Vec<Point>,
    bandwidth: f64,
    /// `[Σxx, Σxy, Σyy]` of the kernel.
    cov: [f64; 3],
    /// `[a, b, c]` of the precision matrix `Σ⁻¹ = [[a, b], [b, c]]`.
    precision: [f64; 3],
    /// `1 / (n · 2π · √det Σ)`.
    norm: f64,
}

impl GaussianKde {
    pub fn new(cloud: &PointCloud) -> Result<Self> {
        let points = cloud.points();
        if points.len() < 3 {
            return Err(Error::short(alloc::format!(
                "kernel density estimate needs at least 3 points, got {}",
                points.len()
            )));
        }
        let (cov, bandwidth) = kernel_covariance(points)?;
        let det = cov[0] * cov[2] - cov[1] * cov[1];
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::invalid("kernel covariance is not positive definite"));
        }
        let precision = [cov[2] / det, -cov[1] / det, cov[0] / det];
        let norm = 1.0 / (points.len() as f64 * 2.0 * core::f64::consts::PI * libm::sqrt(det));
        Ok(GaussianKde {
            points: points.to_vec(),
            bandwidth,
            cov,
            precision,
            norm,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Scott factor `h`.
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Kernel covariance `[[Σxx, Σxy], [Σxy, Σyy]]`.
    pub fn kernel_covariance(&self) -> [[f64; 2]; 2] {
        [[self.cov[0], self.cov[1]], [self.cov[1], self.cov[2]]]
    }

    /// Standard deviation of the kernel along its major axis.
    pub fn spread(&self) -> f64 {
        libm::sqrt(eigenvalues(self.cov).1)
    }

    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.points {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    /// Untruncated mixture density at `(x, y)`, one `exp` per point.
    pub fn density_at(&self, x: f64, y: f64) -> f64 {
        let [a, b, c] = self.precision;
        let sum: f64 = self
            .points
            .iter()
            .map(|p| {
                let (u, v) = (x - p[0], y - p[1]);
                libm::exp(-0.5 * (a * u * u + 2.0 * b * u * v + c * v * v))
            })
            .sum();
        sum * self.norm
    }

    /// Mixture density at every cell center of `spec`, before renormalization.
    pub fn evaluate_raw(&self, spec: &GridSpec) -> Vec<f64> {
        let mut out = alloc::vec![0.0; spec.cells()];
        let [a, b, c] = self.precision;
        let syy = self.cov[2];
        let (dx, dy) = (spec.dx, spec.dy);
        let row_reach = libm::sqrt(KERNEL_CUTOFF * syy);
        let (inv_a, inv_syy) = (1.0 / a, 1.0 / syy);
        let (inv_dx, inv_dy) = (1.0 / dx, 1.0 / dy);
        let growth = libm::exp(-a * dx * dx);
        let lanes_growth = [
            libm::exp(-a * dx * dx * (LANES * (LANES - 1) / 2) as f64),
            libm::exp(-a * dx * dx * (LANES * LANES) as f64),
        ];
        // Cells no wider than a kernel deviation keep every cursor ratio
        // within e^±(6 + 1), far from overflow.
        let steps = (a * dx * dx <= 1.0 && c * dy * dy <= 1.0).then(|| CursorSteps {
            gx: growth,
            gy: libm::exp(-c * dy * dy),
            gxy: libm::exp(-b * dx * dy),
        });
        for p in &self.points {
            let Some((k_lo, k_hi)) = index_span(p[1] - row_reach, p[1] + row_reach, spec.y0, inv_dy, spec.ny) else {
                continue;
            };
            let mut cursor: Option<Cursor> = None;
            for k in k_lo..=k_hi {
                let v = spec.center_y(k) - p[1];
                let q_floor = v * v * inv_syy;
                let span = if q_floor > KERNEL_CUTOFF {
                    None
                } else {
                    let half = libm::sqrt((KERNEL_CUTOFF - q_floor) * inv_a);
                    let mid = p[0] - b * v * inv_a;
                    index_span(mid - half, mid + half, spec.x0, inv_dx, spec.nx)
                };
                let Some((j_lo, j_hi)) = span else {
                    cursor = None;
                    continue;
                };
                let here = match (cursor, &steps) {
                    (Some(prev), Some(st)) if prev.j.abs_diff(j_lo) <= MAX_CURSOR_SHIFT => {
                        prev.up(st).shift_to(j_lo, st)
                    }
                    _ => {
                        let u = spec.center_x(j_lo) - p[0];
                        Cursor {
                            j: j_lo,
                            e: libm::exp(-0.5 * (a * u * u + 2.0 * b * u * v + c * v * v)),
                            rx: libm::exp(-0.5 * (a * (2.0 * u * dx + dx * dx) + 2.0 * b * v * dx)),
                            ry: libm::exp(-0.5 * (c * (2.0 * v * dy + dy * dy) + 2.0 * b * u * dy)),
                        }
                    }
                };
                let row = &mut out[k * spec.nx + j_lo..=k * spec.nx + j_hi];
                if row.len() < 2 * LANES {
                    accumulate_row(row, here.e, here.rx, growth);
                } else {
                    accumulate_row_lanes(row, here.e, here.rx, growth, lanes_growth);
                }
                cursor = Some(here);
            }
        }
        let norm = self.norm;
        out.iter_mut().for_each(|v| *v *= norm);
        out
    }

    /// Density on `spec`, renormalized to unit mass.
    ///
    /// When the kernel is so narrow that it misses every cell center (the
    /// grid mass underflows), the points are binned into their cells
    /// instead, which is the limit of the cell-averaged estimate.
    pub fn evaluate(&self, spec: &GridSpec) -> Result<DensityGrid> {
        let raw = self.evaluate_raw(spec);
        let mass = raw.iter().sum::<f64>() * spec.cell_area();
        if mass.is_finite() && mass > 1e-6 {
            return DensityGrid::normalized(*spec, raw);
        }
        let mut hist = alloc::vec![0.0; spec.cells()];
        for p in &self.points {
            if let Some((j, k)) = spec.cell_of(*p) {
                hist[k * spec.nx + j] += 1.0;
            }
        }
        DensityGrid::normalized(*spec, hist)
            .map_err(|_| Error::short("no point of the cloud lies on the evaluation grid"))
    }

    /// Default grid for this estimate: bounding box plus three kernel
    /// standard deviations per side.
    pub fn auto_grid(&self, nx: usize, ny: usize) -> Result<GridSpec> {
        let (lo, hi) = self.bounds();
        GridSpec::covering(lo, hi, GRID_MARGIN_BANDWIDTHS * self.spread(), nx, ny)
    }
}

/// Largest column jump between consecutive rows that the cursor walks
/// instead of recomputing from scratch.
const MAX_CURSOR_SHIFT: usize = 32;

/// Per-cell kernel ratios of one point: `gx = e^(−a·dx²)`,
/// `gy = e^(−c·dy²)`, `gxy = e^(−b·dx·dy)`.
struct CursorSteps {
    gx: f64,
    gy: f64,
    gxy: f64,
}

/// Kernel value `e` at cell `(j, k)` of one point, with the ratios `rx` to
/// cell `(j + 1, k)` and `ry` to cell `(j, k + 1)`. Moving the cursor one
/// cell costs three multiplications, which replaces two `exp` calls per
/// row.
#[derive(Clone, Copy)]
struct Cursor {
    j: usize,
    e: f64,
    rx: f64,
    ry: f64,
}

impl Cursor {
    fn up(mut self, st: &CursorSteps) -> Self {
        self.e *= self.ry;
        self.rx *= st.gxy;
        self.ry *= st.gy;
        self
    }

    fn shift_to(mut self, j: usize, st: &CursorSteps) -> Self {
        while self.j < j {
            self.e *= self.rx;
            self.ry *= st.gxy;
            self.rx *= st.gx;
            self.j += 1;
        }
        while self.j > j {
            self.rx /= st.gx;
            self.e /= self.rx;
            self.ry /= st.gxy;
            self.j -= 1;
        }
        self
    }
}

/// Independent recurrences interleaved along a row.
const LANES: usize = 4;

/// Adds `e·Π r_i` along `row`, where consecutive ratios grow by `growth`.
fn accumulate_row(row: &mut [f64], mut e: f64, mut r: f64, growth: f64) {
    for cell in row {
        *cell += e;
        e *= r;
        r *= growth;
    }
}

/// Same sum as [`accumulate_row`], with cell `j` carried by lane `j mod
/// LANES` so the multiplications do not form one serial chain. A lane's
/// ratio over `LANES` cells is `r_j^LANES·g^(LANES(LANES−1)/2)` and grows
/// by `g^(LANES²)` per step; `lanes_growth` holds those two powers of `g`.
fn accumulate_row_lanes(row: &mut [f64], e: f64, r: f64, growth: f64, lanes_growth: [f64; 2]) {
    let mut es = [0.0; LANES];
    let mut rs = [0.0; LANES];
    let (mut ei, mut ri) = (e, r);
    for lane in 0..LANES {
        es[lane] = ei;
        let mut step = 1.0;
        for _ in 0..LANES {
            step *= ri;
        }
        rs[lane] = step * lanes_growth[0];
        ei *= ri;
        ri *= growth;
    }
    let mut chunks = row.chunks_exact_mut(LANES);
    for chunk in &mut chunks {
        let chunk: &mut [f64; LANES] = chunk.try_into().expect("exact chunk");
        for lane in 0..LANES {
            chunk[lane] += es[lane];
            es[lane] *= rs[lane];
            rs[lane] *= lanes_growth[1];
        }
    }
    for (cell, e) in chunks.into_remainder().iter_mut().zip(es) {
        *cell += e;
    }
}

/// Inclusive range of cell indices whose centers fall in `[lo, hi]`.
fn index_span(lo: f64, hi: f64, origin: f64, inv_step: f64, n: usize) -> Option<(usize, usize)> {
    // clamp before converting so the integer casts stay exact
    let top = n as f64;
    let t_lo = ((lo - origin) * inv_step - 0.5).clamp(-1.0, top);
    let t_hi = ((hi - origin) * inv_step - 0.5).clamp(-1.0, top);
    let first = {
        let f = t_lo as i64;
        if (f as f64) < t_lo {
            f + 1
        } else {
            f
        }
    }
    .max(0);
    let last = {
        let f = t_hi as i64;
        if (f as f64) > t_hi {
            f - 1
        } else {
            f
        }
    }
    .min(n as i64 - 1);
    if first > last {
        return None;
    }
    Some((first as usize, last as usize))
}

/// Grid covering `cloud` plus three kernel standard deviations per side,
/// split into `nx × ny` cells.
pub fn auto_grid(cloud: &PointCloud, nx: usize, ny: usize) -> Result<GridSpec> {
    let (lo, hi) = cloud.bounds();
    let margin = if cloud.len() >= 2 {
        let (cov, _) = kernel_covariance(cloud.points())?;
        GRID_MARGIN_BANDWIDTHS * libm::sqrt(eigenvalues(cov).1)
    } else {
        0.0
    };
    GridSpec::covering(lo, hi, margin, nx, ny)
}

/// Grid shared by several estimates: union bounding box plus three of the
/// widest kernel's standard deviations.
pub fn shared_grid(kdes: &[&GaussianKde], nx: usize, ny: usize) -> Result<GridSpec> {
    if kdes.is_empty() {
        return Err(Error::param("shared grid needs at least one estimate"));
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut spread: f64 = 0.0;
    for kde in kdes {
        let (l, h) = kde.bounds();
        for d in 0..2 {
            lo[d] = lo[d].min(l[d]);
            hi[d] = hi[d].max(h[d]);
        }
        spread = spread.max(kde.spread());
    }
    GridSpec::covering(lo, hi, GRID_MARGIN_BANDWIDTHS * spread, nx, ny)
}

/// KDE of `cloud` on `spec`, or on the default 128×128 auto grid.
pub fn estimate_kde(cloud: &PointCloud, spec: Option<&GridSpec>) -> Result<DensityGrid> {
    let kde = GaussianKde::new(cloud)?;
    match spec {
        Some(s) => kde.evaluate(s),
        None => kde.evaluate(&kde.auto_grid(DEFAULT_GRID_CELLS, DEFAULT_GRID_CELLS)?),
    }
}

/// Cellwise median of grids sharing one spec, before renormalization.
pub fn cellwise_median(grids: &[&DensityGrid]) -> Result<Vec<f64>> {
    let first = grids
        .first()
        .ok_or_else(|| Error::param("median of an empty grid list"))?;
    if grids.iter().any(|g| g.spec != first.spec) {
        return Err(Error::param("median grids must share one grid spec"));
    }
    let mut column = alloc::vec![0.0; grids.len()];
    Ok((0..first.values.len())
        .map(|i| {
            for (slot, g) in column.iter_mut().zip(grids) {
                *slot = g.values[i];
            }
            median_in_place(&mut column)
        })
        .collect())
}

/// Cellwise median (mean of the middle two for even counts), renormalized.
pub fn median_grid(grids: &[&DensityGrid]) -> Result<DensityGrid> {
    let values = cellwise_median(grids)?;
    DensityGrid::normalized(grids[0].spec, values)
}
