//! Path-based analytic continuation of `log` and the classical
//! polylogarithms, with monodromy bookkeeping.
//!
//! A [`BranchState`] holds the endpoint values of `log z`, `log(1−z)` and
//! `Li_1 … Li_N` after continuation along a stored piecewise-linear path
//! from a base point, using `Li_m(z) = ∫ Li_{m−1}(t) dlog t` along the path.
//! Logarithms advance in closed form segment by segment; the polylogarithm
//! ladder is integrated spectrally on Chebyshev nodes with automatic
//! subdivision, so each segment converges geometrically as long as the path
//! keeps its distance from the branch points `{0, 1}`.

mod flt;

pub use flt::{Cx, Dd, Flt};

use crate::qnum::{q_int, Q};
use num::complex::Complex64;
use num::traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const CHEB_N: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum MultivalError {
    #[error("path segment comes within {0} of a branch point; margin is {1}")]
    PathTooClose(f64, f64),
    #[error("base point must lie in (0,1), got {0}")]
    BadBase(f64),
    #[error("tangential start must satisfy |z| ≤ 0.25, got |z| = {0}")]
    BadTangentialStart(f64),
    #[error("segment integration failed to converge")]
    NonConvergence,
    #[error("state depth {0} is below the requested {1}")]
    InsufficientDepth(usize, usize),
}

/// Where a continuation path begins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Start {
    /// a real base point in (0,1) with principal branches
    Base(f64),
    /// a point in the disc |z| ≤ 1/4 around 0, with the branches fixed by
    /// the series expansions there (the tangential-base-point convention)
    Tangential([f64; 2]),
}

impl Start {
    pub fn point(&self) -> Complex64 {
        match self {
            Start::Base(a) => Complex64::new(*a, 0.0),
            Start::Tangential(z) => Complex64::new(z[0], z[1]),
        }
    }
}

/// A piecewise-linear continuation path.
#[derive(Debug, Clone)]
pub struct PathSpec {
    pub start: Start,
    pub waypoints: Vec<Complex64>,
    pub margin: f64,
}

impl PathSpec {
    pub fn new(base: f64, waypoints: Vec<Complex64>) -> Self {
        PathSpec { start: Start::Base(base), waypoints, margin: 0.05 }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn endpoint(&self) -> Complex64 {
        self.waypoints.last().copied().unwrap_or_else(|| self.start.point())
    }

    fn points(&self) -> Vec<Complex64> {
        let mut pts = vec![self.start.point()];
        pts.extend(self.waypoints.iter().copied());
        pts
    }

    pub fn validate(&self) -> Result<(), MultivalError> {
        match self.start {
            Start::Base(a) => {
                if !(a > 0.0 && a < 1.0) {
                    return Err(MultivalError::BadBase(a));
                }
            }
            Start::Tangential(z) => {
                let r = Complex64::new(z[0], z[1]).norm();
                if r > 0.25 || r == 0.0 {
                    return Err(MultivalError::BadTangentialStart(r));
                }
            }
        }
        let pts = self.points();
        for w in pts.windows(2) {
            for pole in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)] {
                let d = point_segment_distance(pole, w[0], w[1]);
                if d < self.margin {
                    return Err(MultivalError::PathTooClose(d, self.margin));
                }
            }
        }
        Ok(())
    }
}

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Endpoint branch data after continuation along a stored path.
#[derive(Debug, Clone)]
pub struct BranchState {
    pub z: Complex64,
    pub log_z: Complex64,
    pub log_1mz: Complex64,
    /// `li[m-1]` is `Li_m`, for `m = 1..=depth`
    pub li: Vec<Complex64>,
    pub path: PathSpec,
}

impl BranchState {
    pub fn depth(&self) -> usize {
        self.li.len()
    }

    pub fn li_m(&self, m: usize) -> Complex64 {
        self.li[m - 1]
    }

    /// Winding of the stored `log z` branch relative to the principal one.
    pub fn winding0(&self) -> i64 {
        ((self.log_z.im - self.z.arg()) / (2.0 * PI)).round() as i64
    }

    /// Winding of the stored `log(1−z)` branch relative to the principal one.
    pub fn winding1(&self) -> i64 {
        let principal = (Complex64::new(1.0, 0.0) - self.z).arg();
        ((self.log_1mz.im - principal) / (2.0 * PI)).round() as i64
    }

    /// Continues the state through further waypoints (appended to the path).
    pub fn continue_through(&self, pts: &[Complex64]) -> Result<BranchState, MultivalError> {
        let mut path = self.path.clone();
        path.waypoints.extend(pts.iter().copied());
        // validate only the new portion
        let mut check_pts = vec![self.z];
        check_pts.extend(pts.iter().copied());
        for w in check_pts.windows(2) {
            for pole in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)] {
                let d = point_segment_distance(pole, w[0], w[1]);
                if d < self.path.margin {
                    return Err(MultivalError::PathTooClose(d, self.path.margin));
                }
            }
        }
        let vals = Values::<f64> {
            log_z: Cx::from_c64(self.log_z),
            log_1mz: Cx::from_c64(self.log_1mz),
            li: self.li.iter().map(|v| Cx::from_c64(*v)).collect(),
        };
        let out = continue_values(Cx::from_c64(self.z), vals, &check_pts[1..], 1e-14)?;
        Ok(BranchState {
            z: *pts.last().unwrap_or(&self.z),
            log_z: out.log_z.to_c64(),
            log_1mz: out.log_1mz.to_c64(),
            li: out.li.iter().map(|v| v.to_c64()).collect(),
            path,
        })
    }

    /// One-segment continuation to a nearby point; used when a state is
    /// treated as a germ of the surrounding functions.
    pub fn extend_to(&self, z: Complex64) -> Result<BranchState, MultivalError> {
        self.continue_through(&[z])
    }
}

struct Values<F: Flt> {
    log_z: Cx<F>,
    log_1mz: Cx<F>,
    li: Vec<Cx<F>>,
}

/// Continues all branch values along `path`, tracking `depth` polylogarithms.
pub fn continue_along(path: &PathSpec, depth: usize) -> Result<BranchState, MultivalError> {
    continue_along_f64(path, depth)
}

pub fn continue_along_f64(path: &PathSpec, depth: usize) -> Result<BranchState, MultivalError> {
    path.validate()?;
    let init = initial_values::<f64>(&path.start, depth)?;
    let pts = path.points();
    let out = continue_values(Cx::from_c64(pts[0]), init, &pts[1..], 1e-14)?;
    Ok(BranchState {
        z: path.endpoint(),
        log_z: out.log_z.to_c64(),
        log_1mz: out.log_1mz.to_c64(),
        li: out.li.iter().map(|v| v.to_c64()).collect(),
        path: path.clone(),
    })
}

/// Extended-precision continuation (double-double, ~106-bit significands);
/// the result is rounded back to binary64 for storage.
pub fn continue_along_extended(path: &PathSpec, depth: usize) -> Result<BranchState, MultivalError> {
    path.validate()?;
    let init = initial_values::<Dd>(&path.start, depth)?;
    let pts = path.points();
    let out = continue_values(Cx::from_c64(pts[0]), init, &pts[1..], 1e-26)?;
    Ok(BranchState {
        z: path.endpoint(),
        log_z: out.log_z.to_c64(),
        log_1mz: out.log_1mz.to_c64(),
        li: out.li.iter().map(|v| v.to_c64()).collect(),
        path: path.clone(),
    })
}

fn initial_values<F: Flt>(start: &Start, depth: usize) -> Result<Values<F>, MultivalError> {
    match start {
        Start::Base(a) => {
            if !(*a > 0.0 && *a < 1.0) {
                return Err(MultivalError::BadBase(*a));
            }
            let za = Cx::new(F::from_f64(*a), F::zero());
            let one = Cx::new(F::one(), F::zero());
            Ok(Values {
                log_z: ln_series(za),
                log_1mz: ln_series(one - za),
                li: li_series_ladder(za, depth),
            })
        }
        Start::Tangential(z) => {
            let z0 = Complex64::new(z[0], z[1]);
            if z0.norm() > 0.25 || z0.norm() == 0.0 {
                return Err(MultivalError::BadTangentialStart(z0.norm()));
            }
            let zc = Cx::<F>::from_c64(z0);
            let one = Cx::new(F::one(), F::zero());
            Ok(Values {
                log_z: ln_principal(zc),
                log_1mz: ln_principal(one - zc),
                li: li_series_ladder(zc, depth),
            })
        }
    }
}

/// Principal complex logarithm for any nonzero argument: a quarter-turn
/// rotation picked in double precision brings the point into the right
/// half-plane, where the atanh series applies.
fn ln_principal<F: Flt>(z: Cx<F>) -> Cx<F> {
    let arg = z.to_c64().arg();
    let k = (arg / (PI / 2.0)).round() as i64; // k ∈ {−2,−1,0,1,2}
    let mut rotated = z;
    // multiply by (−i)^k
    let m = k.rem_euclid(4);
    for _ in 0..m {
        rotated = Cx::new(rotated.im, -rotated.re);
    }
    let mut out = ln_series(rotated);
    let half_pi = F::pi() / F::from_f64(2.0);
    out.im = out.im + F::from_f64(k as f64) * half_pi;
    out
}

/// Complex logarithm by range reduction and the atanh series. For a point
/// on the principal sheet this agrees with the principal branch as long as
/// re(z) > 0 or |im(z)| is not small — which holds everywhere we use it
/// (positive reals and small discs around them).
fn ln_series<F: Flt>(z: Cx<F>) -> Cx<F> {
    // scale by powers of two so that |z| ∈ [2/3, 4/3]
    let mut z = z;
    let mut k = 0i32;
    let ln2 = ln2_const::<F>();
    loop {
        let n = z.norm_sqr().to_f64();
        if n < 4.0 / 9.0 {
            z = z.scale(F::from_f64(2.0));
            k -= 1;
        } else if n > 16.0 / 9.0 {
            z = z.scale(F::from_f64(0.5));
            k += 1;
        } else {
            break;
        }
    }
    let one = Cx::new(F::one(), F::zero());
    let u = (z - one) / (z + one);
    let mut term = u;
    let u2 = u * u;
    let mut sum = u;
    let mut n = 1.0;
    loop {
        n += 2.0;
        term = term * u2;
        let add = term.scale(F::from_f64(1.0) / F::from_f64(n));
        sum = sum + add;
        if add.norm_sqr().to_f64() < 1e-70 {
            break;
        }
    }
    let mut out = sum.scale(F::from_f64(2.0));
    out.re = out.re + F::from_f64(k as f64) * ln2;
    out
}

fn ln2_const<F: Flt>() -> F {
    // ln 2 = 2 atanh(1/3)
    let third = F::one() / F::from_f64(3.0);
    let mut term = third;
    let t2 = third * third;
    let mut sum = third;
    let mut n = 1.0;
    loop {
        n += 2.0;
        term = term * t2;
        let add = term / F::from_f64(n);
        sum = sum + add;
        if add.to_f64().abs() < 1e-40 {
            break;
        }
    }
    sum * F::from_f64(2.0)
}

/// `Li_1 .. Li_depth` at a point inside the unit disc, by power series.
fn li_series_ladder<F: Flt>(z: Cx<F>, depth: usize) -> Vec<Cx<F>> {
    let mut out = vec![Cx::<F>::zero(); depth];
    let mut zk = Cx::new(F::one(), F::zero());
    let cap = {
        let r = z.norm_sqr().to_f64().sqrt();
        if r >= 0.999 {
            100_000
        } else {
            ((-80.0) / r.ln()).ceil().max(24.0) as usize
        }
    };
    for k in 1..=cap {
        zk = zk * z;
        let mut inv_pow = F::one() / F::from_f64(k as f64);
        for slot in out.iter_mut() {
            *slot = *slot + zk.scale(inv_pow);
            inv_pow = inv_pow / F::from_f64(k as f64);
        }
        if zk.norm_sqr().to_f64() < 1e-70 {
            break;
        }
    }
    out
}

fn continue_values<F: Flt>(
    z0: Cx<F>,
    mut vals: Values<F>,
    targets: &[Complex64],
    tol: f64,
) -> Result<Values<F>, MultivalError> {
    let one = Cx::new(F::one(), F::zero());
    let mut cur = z0;
    let mut cur_w = one - z0;
    for t in targets {
        let z1 = Cx::<F>::from_c64(*t);
        let w1 = one - z1;
        piecewise_segment(&mut cur, &mut cur_w, &mut vals, z1, w1, tol, 0)?;
    }
    Ok(vals)
}

/// Advances the values along the straight segment `z0 → z1`, splitting so
/// that each piece is shorter than half its distance to the branch points.
/// The coordinate `w = 1 − z` is interpolated on its own so that node values
/// stay fully accurate next to the branch point at 1.
#[allow(clippy::too_many_arguments)]
fn piecewise_segment<F: Flt>(
    z0: &mut Cx<F>,
    w0: &mut Cx<F>,
    vals: &mut Values<F>,
    z1: Cx<F>,
    w1: Cx<F>,
    tol: f64,
    level: usize,
) -> Result<(), MultivalError> {
    if level > 80 {
        return Err(MultivalError::NonConvergence);
    }
    let a = z0.to_c64();
    let b = z1.to_c64();
    let len = (b - a).norm();
    if len == 0.0 {
        return Ok(());
    }
    let dist = point_segment_distance(Complex64::new(0.0, 0.0), a, b)
        .min(point_segment_distance(Complex64::new(1.0, 0.0), a, b));
    if len > 0.5 * dist {
        let mid = (*z0 + z1).scale(F::from_f64(0.5));
        let mid_w = (*w0 + w1).scale(F::from_f64(0.5));
        piecewise_segment(z0, w0, vals, mid, mid_w, tol, level + 1)?;
        piecewise_segment(z0, w0, vals, z1, w1, tol, level + 1)?;
        return Ok(());
    }
    segment_step(z0, w0, vals, z1, w1, tol)
}

/// One spectral step over a short segment.
fn segment_step<F: Flt>(
    z0: &mut Cx<F>,
    w0: &mut Cx<F>,
    vals: &mut Values<F>,
    z1: Cx<F>,
    w1: Cx<F>,
    tol: f64,
) -> Result<(), MultivalError> {
    let n = CHEB_N;
    let half = (z1 - *z0).scale(F::from_f64(0.5));
    let mid = (z1 + *z0).scale(F::from_f64(0.5));
    let half_w = (w1 - *w0).scale(F::from_f64(0.5));
    let mid_w = (w1 + *w0).scale(F::from_f64(0.5));

    // cos table: cos(mπ/N) for m = 0..2N
    let cos_tab: Vec<F> = (0..2 * n + 1).map(|m| F::cos_pi_frac(m, n)).collect();
    // nodes ordered from s = −1 (start) to s = +1 (end)
    let s_of = |k: usize| -cos_tab[k]; // k = 0 → −1, k = N → +1
    let nodes: Vec<Cx<F>> = (0..=n).map(|k| mid + half.scale(s_of(k))).collect();
    let nodes_w: Vec<Cx<F>> = (0..=n).map(|k| mid_w + half_w.scale(s_of(k))).collect();

    // closed-form logs along the piece (ratios to the start stay near 1)
    let lz0 = vals.log_z;
    let l1mz0 = vals.log_1mz;
    let lz: Vec<Cx<F>> = nodes.iter().map(|zk| lz0 + ln_series(*zk / nodes[0])).collect();
    let l1mz: Vec<Cx<F>> = nodes_w.iter().map(|wk| l1mz0 + ln_series(*wk / nodes_w[0])).collect();

    let mut li_nodes: Vec<Vec<Cx<F>>> = Vec::with_capacity(vals.li.len());
    // Li_1 = −log(1−z)
    if !vals.li.is_empty() {
        li_nodes.push(l1mz.iter().map(|v| -*v).collect());
    }
    for m in 2..=vals.li.len() {
        let prev = &li_nodes[m - 2];
        // integrand Li_{m−1}(z(s)) · z'(s)/z(s), z'(s) = half
        let integrand: Vec<Cx<F>> =
            prev.iter().zip(&nodes).map(|(p, zk)| *p * half / *zk).collect();
        let (values_at_nodes, tail) = chebyshev_antiderivative(&integrand, &cos_tab);
        if tail > tol.max(1e-13) {
            return Err(MultivalError::NonConvergence);
        }
        let start_val = vals.li[m - 1];
        li_nodes.push(values_at_nodes.iter().map(|v| start_val + *v).collect());
    }

    vals.log_z = lz[n];
    vals.log_1mz = l1mz[n];
    for (m, col) in li_nodes.iter().enumerate() {
        vals.li[m] = col[n];
    }
    *z0 = z1;
    *w0 = w1;
    Ok(())
}

/// Chebyshev interpolation of `f` at the N+1 extrema (ordered −1 → +1),
/// then the antiderivative vanishing at −1, evaluated back at the nodes.
/// Returns (values, relative tail estimate).
fn chebyshev_antiderivative<F: Flt>(f: &[Cx<F>], cos_tab: &[F]) -> (Vec<Cx<F>>, f64) {
    let n = f.len() - 1;
    // reorder to standard x_k = cos(kπ/N): our input index k has s = −cos(kπ/N),
    // i.e. f_std[k] = f[n − k]
    let fs = |k: usize| f[n - k];
    // a_j = (2/N) Σ'' f(x_k) cos(jkπ/N)
    let mut coeff = vec![Cx::<F>::zero(); n + 1];
    for (j, cj) in coeff.iter_mut().enumerate() {
        let mut sum = fs(0).scale(F::from_f64(0.5));
        for k in 1..n {
            let c = cos_tab[(j * k) % (2 * n)];
            sum = sum + fs(k).scale(c);
        }
        let c_end = cos_tab[(j * n) % (2 * n)];
        sum = sum + fs(n).scale(c_end * F::from_f64(0.5));
        *cj = sum.scale(F::from_f64(2.0 / n as f64));
    }
    // fold the endpoint-halving convention into plain T_j coefficients
    coeff[0] = coeff[0].scale(F::from_f64(0.5));
    coeff[n] = coeff[n].scale(F::from_f64(0.5));

    let mut max_c = 0.0f64;
    for c in &coeff {
        max_c = max_c.max(c.norm_sqr().to_f64().sqrt());
    }
    let tail = if max_c == 0.0 {
        0.0
    } else {
        let t1 = coeff[n].norm_sqr().to_f64().sqrt();
        let t2 = coeff[n - 1].norm_sqr().to_f64().sqrt();
        (t1 + t2) / max_c
    };

    // antiderivative coefficients: C_j = (b_{j−1} − b_{j+1}) / (2j)
    let b = |j: usize| -> Cx<F> {
        if j <= n {
            coeff[j]
        } else {
            Cx::zero()
        }
    };
    let mut anti = vec![Cx::<F>::zero(); n + 2];
    for j in 1..=n + 1 {
        // the classical recurrence reads off the series with halved leading
        // coefficient, so b_0 enters doubled at j = 1
        let low = if j == 1 { b(0).scale(F::from_f64(2.0)) } else { b(j - 1) };
        let num = low - b(j + 1);
        anti[j] = num.scale(F::one() / F::from_f64(2.0 * j as f64));
    }
    // G(−1) = Σ (−1)^j C_j
    let mut g_m1 = Cx::<F>::zero();
    for (j, cj) in anti.iter().enumerate() {
        if j % 2 == 0 {
            g_m1 = g_m1 + *cj;
        } else {
            g_m1 = g_m1 - *cj;
        }
    }
    // evaluate F(s_k) = G(s_k) − G(−1) at the nodes, back in input order
    let m2 = 2 * n;
    let eval = |k_std: usize| -> Cx<F> {
        // T_j(x_k) = cos(jkπ/N)
        let mut acc = Cx::<F>::zero();
        for (j, cj) in anti.iter().enumerate() {
            let c = cos_tab[(j * k_std) % m2];
            acc = acc + cj.scale(c);
        }
        acc - g_m1
    };
    let out: Vec<Cx<F>> = (0..=n).map(|k| eval(n - k)).collect();
    (out, tail)
}

// ---------------------------------------------------------------------------
// monodromy
// ---------------------------------------------------------------------------

/// Generators of the fundamental group of `C − {0,1}` based at the path's
/// start: small counterclockwise loops around 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonodromyLoop {
    Gamma0,
    Gamma1,
    Gamma0Inv,
    Gamma1Inv,
}

/// Closed-form monodromy action on the stored branch values: the loop is
/// inserted at the base point before the stored path. Around 0 only
/// `log z` shifts; around 1, `log(1−z)` shifts by `2πi` and
/// `Li_m ↦ Li_m − 2πi·log^{m−1} z / (m−1)!`.
pub fn monodromy(state: &BranchState, loop_: MonodromyLoop) -> BranchState {
    let mut out = state.clone();
    let tpi = Complex64::new(0.0, 2.0 * PI);
    match loop_ {
        MonodromyLoop::Gamma0 => out.log_z += tpi,
        MonodromyLoop::Gamma0Inv => out.log_z -= tpi,
        MonodromyLoop::Gamma1 | MonodromyLoop::Gamma1Inv => {
            let sign = if loop_ == MonodromyLoop::Gamma1 { 1.0 } else { -1.0 };
            out.log_1mz += tpi * sign;
            let mut fact = 1.0;
            let mut logpow = Complex64::new(1.0, 0.0);
            for m in 1..=state.depth() {
                out.li[m - 1] -= tpi * sign * logpow / fact;
                logpow *= state.log_z;
                fact *= m as f64;
            }
        }
    }
    out.path.waypoints = {
        let mut wp = base_loop_points(&state.path.start, loop_);
        wp.extend(state.path.waypoints.iter().copied());
        wp
    };
    out
}

/// Waypoints of a polyline homotopic to the chosen base loop, beginning and
/// ending at the base point.
fn base_loop_points(start: &Start, loop_: MonodromyLoop) -> Vec<Complex64> {
    let r = 0.35;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let a = start.point();
    let around0 = vec![c(r, 0.0), c(0.0, r), c(-r, 0.0), c(0.0, -r), c(r, 0.0), a];
    let around0_rev = vec![c(r, 0.0), c(0.0, -r), c(-r, 0.0), c(0.0, r), c(r, 0.0), a];
    let around1 = vec![c(1.0 - r, 0.0), c(1.0, -r), c(1.0 + r, 0.0), c(1.0, r), c(1.0 - r, 0.0), a];
    let around1_rev =
        vec![c(1.0 - r, 0.0), c(1.0, r), c(1.0 + r, 0.0), c(1.0, -r), c(1.0 - r, 0.0), a];
    match loop_ {
        MonodromyLoop::Gamma0 => around0,
        MonodromyLoop::Gamma0Inv => around0_rev,
        MonodromyLoop::Gamma1 => around1,
        MonodromyLoop::Gamma1Inv => around1_rev,
    }
}

/// Numeric monodromy: walks back along the stored path, around the base
/// loop, and forward again, by honest continuation.
pub fn monodromy_numeric(
    state: &BranchState,
    loop_: MonodromyLoop,
) -> Result<BranchState, MultivalError> {
    let mut pts = state.path.points();
    pts.reverse();
    let mut route: Vec<Complex64> = pts[1..].to_vec(); // back to the start
    route.extend(base_loop_points(&state.path.start, loop_));
    let fwd = state.path.points();
    route.extend(fwd[1..].iter().copied());
    state.continue_through(&route)
}

// ---------------------------------------------------------------------------
// the functions L_n and their single-valued projections
// ---------------------------------------------------------------------------

/// `L_n(z) = Σ_{k=0}^{n−1} β_k Li_{n−k}(z) log^k z` on the state's branches.
pub fn l_n(state: &BranchState, n: usize) -> Result<Complex64, MultivalError> {
    if state.depth() < n {
        return Err(MultivalError::InsufficientDepth(state.depth(), n));
    }
    let table = BernoulliTable::new(n);
    let mut total = Complex64::new(0.0, 0.0);
    let mut logpow = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let beta = crate::qnum::q_to_f64(&table.beta(k));
        total += beta * state.li_m(n - k) * logpow;
        logpow *= state.log_z;
    }
    Ok(total)
}

/// The dilogarithm variant used for the Bloch-complex map: it carries an
/// extra `(2πi)²/24` so that `L₂(x) + L₂(1−x)` is exactly torsion, and it
/// is written with `log(1−x)` rather than `−Li_1`.
pub fn l2_with_torsion_constant(state: &BranchState) -> Result<Complex64, MultivalError> {
    if state.depth() < 2 {
        return Err(MultivalError::InsufficientDepth(state.depth(), 2));
    }
    let tpi = Complex64::new(0.0, 2.0 * PI);
    Ok(state.li_m(2) + 0.5 * state.log_1mz * state.log_z + tpi * tpi / 24.0)
}

/// `π_n`: the projection `C → R(n−1)`; the real part for odd `n`, the
/// imaginary part (times i) for even `n`.
pub fn pi_n(v: Complex64, n: usize) -> Complex64 {
    if n % 2 == 1 {
        Complex64::new(v.re, 0.0)
    } else {
        Complex64::new(0.0, v.im)
    }
}

/// The single-valued function `π_n(Σ 2^k β_k Li_{n−k}(z) log^k |z|)`.
///
/// The doubling `2^k` on the Bernoulli coefficients is what makes the
/// projection branch-independent: already at `n = 2` the imaginary part of
/// `Li₂ − log|z|·Li₁` is the Bloch–Wigner function, while the `β₁ = −1/2`
/// coefficient alone picks up `−π log|z|` around the branch point at 1.
pub fn zagier_single_valued(state: &BranchState, n: usize) -> Result<Complex64, MultivalError> {
    if state.depth() < n {
        return Err(MultivalError::InsufficientDepth(state.depth(), n));
    }
    let table = BernoulliTable::new(n);
    let log_abs = Complex64::new(state.log_z.re, 0.0);
    let mut total = Complex64::new(0.0, 0.0);
    let mut logpow = Complex64::new(1.0, 0.0);
    let mut two_k = 1.0;
    for k in 0..n {
        let beta = crate::qnum::q_to_f64(&table.beta(k));
        total += two_k * beta * state.li_m(n - k) * logpow;
        logpow *= log_abs;
        two_k *= 2.0;
    }
    Ok(pi_n(total, n))
}

// ---------------------------------------------------------------------------
// Bernoulli numbers
// ---------------------------------------------------------------------------

/// Exact table of `β_k = B_k / k!`, the coefficients of `t/(e^t − 1)`.
#[derive(Debug, Clone)]
pub struct BernoulliTable {
    beta: Vec<Q>,
}

impl BernoulliTable {
    pub fn new(max_k: usize) -> Self {
        // Σ_{j≤m} β_j / (m−j+1)! = [m = 0]
        let mut beta: Vec<Q> = Vec::with_capacity(max_k + 1);
        let mut factorials: Vec<Q> = vec![Q::one()];
        for m in 1..=(max_k + 2) {
            let f = &factorials[m - 1] * q_int(m as i64);
            factorials.push(f);
        }
        for m in 0..=max_k {
            if m == 0 {
                beta.push(Q::one());
                continue;
            }
            let mut s = Q::zero();
            for (j, b) in beta.iter().enumerate() {
                s += b / &factorials[m - j + 1];
            }
            beta.push(-s);
        }
        BernoulliTable { beta }
    }

    pub fn beta(&self, k: usize) -> Q {
        self.beta[k].clone()
    }

    /// `B_k = β_k · k!`
    pub fn bernoulli(&self, k: usize) -> Q {
        let mut f = Q::one();
        for i in 1..=k {
            f *= q_int(i as i64);
        }
        &self.beta[k] * f
    }

    /// Verifies `(Σ β_k t^k)(e^t − 1) = t` exactly through the table order.
    pub fn generating_identity_holds(&self) -> bool {
        let order = self.beta.len() - 1;
        let mut s = crate::qnum::SeriesQ::zero(order);
        s.coeffs[..(order + 1)].clone_from_slice(&self.beta[..(order + 1)]);
        let e = crate::qnum::SeriesQ::exp_minus_one(order);
        let prod = s.mul(&e);
        let mut expect = crate::qnum::SeriesQ::zero(order);
        expect.coeffs[1] = Q::one();
        prod == expect
    }

    /// `Σ_{k=0}^{n−1} B_k/(k!(n−k−1)!) = (−1)^{n−1} B_{n−1}/(n−1)!` exactly;
    /// the left side is `B_{n−1}(1)/(n−1)!`, and the sign only matters at
    /// `n = 2` since the higher odd Bernoulli numbers vanish.
    pub fn convolution_identity_holds(&self, n: usize) -> bool {
        assert!(n >= 1 && n - 1 < self.beta.len());
        let mut lhs = Q::zero();
        for k in 0..n {
            let mut f = Q::one();
            for i in 1..=(n - k - 1) {
                f *= q_int(i as i64);
            }
            lhs += &self.beta[k] / f;
        }
        let rhs = if n % 2 == 1 { self.beta[n - 1].clone() } else { -self.beta[n - 1].clone() };
        lhs == rhs
    }
}

/// Closed-form monodromy increment `(1/2πi)(T_γ − Id) L_n` predicted for the
/// two generators, expressed through the state's current values.
pub fn l_n_monodromy_increment(
    state: &BranchState,
    n: usize,
    loop_: MonodromyLoop,
) -> Result<Complex64, MultivalError> {
    let before = l_n(state, n)?;
    let after = l_n(&monodromy(state, loop_), n)?;
    Ok((after - before) / Complex64::new(0.0, 2.0 * PI))
}

#[cfg(test)]
mod tests;
