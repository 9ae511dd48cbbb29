//! Gauss–Kronrod rules and globally adaptive integrators.
//!
//! The 1-D integrator keeps every interval in a priority queue keyed by its
//! error estimate and always bisects the worst one. The 2-D integrator does
//! the same with tensor-product cells and matrix-valued integrands,
//! evaluating each batch of refined cells in parallel.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{frobenius, CompensatedSum, MatrixAccumulator};

/// Kronrod abscissae on `[0, 1]`, descending; the odd entries are the
/// 7-point Gauss nodes and the last one is the centre.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

/// The 15 reference nodes on `[-1, 1]` with Kronrod and Gauss weights
/// (Gauss weight 0 for Kronrod-only nodes).
#[derive(Debug, Clone, Copy)]
pub struct Rule {
    pub nodes: [f64; 15],
    pub kronrod: [f64; 15],
    pub gauss: [f64; 15],
}

pub const GK15: Rule = build_rule();

const fn build_rule() -> Rule {
    let mut nodes = [0.0; 15];
    let mut kronrod = [0.0; 15];
    let mut gauss = [0.0; 15];
    let mut j = 0;
    while j < 7 {
        nodes[j] = -XGK[j];
        nodes[14 - j] = XGK[j];
        kronrod[j] = WGK[j];
        kronrod[14 - j] = WGK[j];
        if j % 2 == 1 {
            gauss[j] = WG[(j - 1) / 2];
            gauss[14 - j] = WG[(j - 1) / 2];
        }
        j += 1;
    }
    nodes[7] = 0.0;
    kronrod[7] = WGK[7];
    gauss[7] = WG[3];
    Rule {
        nodes,
        kronrod,
        gauss,
    }
}

impl Rule {
    /// Nodes mapped onto `[a, b]`.
    pub fn nodes_on(&self, a: f64, b: f64) -> [f64; 15] {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.map(|t| c + h * t)
    }
}

/// Result of a 1-D integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Stopping and budget controls for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Controls {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Controls {
    pub fn absolute(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: 0.0,
            max_intervals: 50_000,
        }
    }

    fn satisfied(&self, value: f64, error: f64) -> bool {
        error <= self.abs_tol.max(self.rel_tol * value.abs())
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let h = 0.5 * (b - a);
    let xs = GK15.nodes_on(a, b);
    let mut k = 0.0;
    let mut g = 0.0;
    for i in 0..15 {
        let y = f(xs[i]);
        k += GK15.kronrod[i] * y;
        g += GK15.gauss[i] * y;
    }
    (h * k, (h * (k - g)).abs())
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Integrates `f` over `[points[0], points.last()]`, starting from the
/// subdivision given by `points` (sorted). Endpoints are never evaluated.
pub fn integrate<F: Fn(f64) -> f64>(f: F, points: &[f64], controls: Controls) -> Result<Integral> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("integration breakpoints must be strictly increasing"));
    }
    let mut heap = BinaryHeap::new();
    let mut err_sum = 0.0;
    for w in points.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1]);
        err_sum += error;
        heap.push(Interval {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let mut frozen: Vec<Interval> = Vec::new();
    let total_value = |heap: &BinaryHeap<Interval>, frozen: &[Interval]| {
        let mut all: Vec<&Interval> = heap.iter().chain(frozen.iter()).collect();
        all.sort_by(|x, y| x.a.total_cmp(&y.a));
        all.iter().map(|i| i.value).collect::<CompensatedSum>().value()
    };
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds % 256 == 0 {
            err_sum = heap.iter().chain(frozen.iter()).map(|i| i.error).sum();
        }
        let count = heap.len() + frozen.len();
        let worst = heap.peek().map(|i| i.error).unwrap_or(0.0);
        // Only the running value matters for the relative test; refresh it lazily.
        let done_abs = err_sum <= controls.abs_tol;
        if done_abs || worst == 0.0 {
            break;
        }
        if controls.rel_tol > 0.0 && rounds % 16 == 1 {
            let v = total_value(&heap, &frozen);
            if controls.satisfied(v, err_sum) {
                break;
            }
        }
        if count >= controls.max_intervals {
            let value = total_value(&heap, &frozen);
            if controls.satisfied(value, err_sum) {
                break;
            }
            return Err(Error::NonConvergence {
                estimate: err_sum,
                tol: controls.abs_tol.max(controls.rel_tol * value.abs()),
                cells: count,
            });
        }
        let iv = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (iv.a + iv.b);
        if !(iv.a < mid && mid < iv.b) {
            frozen.push(iv);
            continue;
        }
        err_sum -= iv.error;
        for (a, b) in [(iv.a, mid), (mid, iv.b)] {
            let (value, error) = gk15(&f, a, b);
            err_sum += error;
            heap.push(Interval { a, b, value, error });
        }
    }
    let error: f64 = heap.iter().chain(frozen.iter()).map(|i| i.error).sum();
    let value = total_value(&heap, &frozen);
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::Divergent("integrand produced non-finite values".into()));
    }
    Ok(Integral {
        value,
        error,
        intervals: heap.len() + frozen.len(),
    })
}

/// Axis-aligned rectangle in integration coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub v0: f64,
    pub v1: f64,
    pub s0: f64,
    pub s1: f64,
}

impl Rect {
    pub fn area(&self) -> f64 {
        (self.v1 - self.v0) * (self.s1 - self.s0)
    }
}

/// A matrix-valued integrand sampled one column (fixed `v`) at a time.
pub trait MatrixField: Sync {
    fn dim(&self) -> usize;
    /// Fills `out[j]` with the integrand at `(v, s[j])`, or `None` where it
    /// vanishes.
    fn column(&self, v: f64, s: &[f64; 15], out: &mut [Option<DMatrix<Complex64>>]) -> Result<()>;
}

/// Tensor G7K15 estimate on one cell.
#[derive(Debug, Clone)]
pub struct CellEstimate {
    pub value: DMatrix<Complex64>,
    /// `|| K x K - G x G ||_F`
    pub error: f64,
    /// Error attributable to each axis: `|| K x K - G x K ||_F` and
    /// `|| K x K - K x G ||_F`.
    pub error_v: f64,
    pub error_s: f64,
    pub evaluations: usize,
}

fn add_scaled(acc: &mut DMatrix<Complex64>, w: f64, m: &DMatrix<Complex64>) {
    for (a, b) in acc.iter_mut().zip(m.iter()) {
        *a += w * b;
    }
}

pub fn tensor_gk15<M: MatrixField + ?Sized>(field: &M, rect: Rect) -> Result<CellEstimate> {
    let d = field.dim();
    let zero = DMatrix::<Complex64>::zeros(d, d);
    let vs = GK15.nodes_on(rect.v0, rect.v1);
    let ss = GK15.nodes_on(rect.s0, rect.s1);
    let (mut kk, mut gg, mut gk, mut kg) = (zero.clone(), zero.clone(), zero.clone(), zero);
    let mut col: Vec<Option<DMatrix<Complex64>>> = vec![None; 15];
    let mut evaluations = 0;
    for (i, &v) in vs.iter().enumerate() {
        col.iter_mut().for_each(|c| *c = None);
        field.column(v, &ss, &mut col)?;
        let (wk_v, wg_v) = (GK15.kronrod[i], GK15.gauss[i]);
        for (j, m) in col.iter().enumerate() {
            let Some(m) = m else { continue };
            evaluations += 1;
            let (wk_s, wg_s) = (GK15.kronrod[j], GK15.gauss[j]);
            add_scaled(&mut kk, wk_v * wk_s, m);
            if wg_v != 0.0 {
                add_scaled(&mut gk, wg_v * wk_s, m);
                if wg_s != 0.0 {
                    add_scaled(&mut gg, wg_v * wg_s, m);
                }
            }
            if wg_s != 0.0 {
                add_scaled(&mut kg, wk_v * wg_s, m);
            }
        }
    }
    let scale = Complex64::from(0.25 * rect.area());
    kk *= scale;
    gg *= scale;
    gk *= scale;
    kg *= scale;
    Ok(CellEstimate {
        error: frobenius(&(&kk - &gg)),
        error_v: frobenius(&(&kk - &gk)),
        error_s: frobenius(&(&kk - &kg)),
        value: kk,
        evaluations,
    })
}

/// Controls for [`integrate_2d`].
#[derive(Debug, Clone, Copy)]
pub struct Controls2d {
    pub tol: f64,
    /// Error that is already committed before integration starts.
    pub fixed_error: f64,
    pub max_depth: u32,
    pub max_cells: usize,
}

/// Outcome of [`integrate_2d`].
#[derive(Debug, Clone)]
pub struct Integral2d {
    pub value: DMatrix<Complex64>,
    pub error: f64,
    pub cells: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
struct Cell {
    rect: Rect,
    depth: u32,
    id: u64,
    est: CellEstimate,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est
            .error
            .total_cmp(&other.est.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

const BATCH: usize = 64;
/// Cells whose error falls below `tol * RETIRE` are folded into the running
/// total and never refined again.
const RETIRE: f64 = 1e-9;
/// Axis-selection ratio: refine one direction only when it dominates.
const ANISOTROPY: f64 = 8.0;

fn split(rect: Rect, est: &CellEstimate) -> Vec<Rect> {
    let vm = 0.5 * (rect.v0 + rect.v1);
    let sm = 0.5 * (rect.s0 + rect.s1);
    let halves_v = [Rect { v1: vm, ..rect }, Rect { v0: vm, ..rect }];
    let halves_s = [Rect { s1: sm, ..rect }, Rect { s0: sm, ..rect }];
    if est.error_v > ANISOTROPY * est.error_s {
        halves_v.to_vec()
    } else if est.error_s > ANISOTROPY * est.error_v {
        halves_s.to_vec()
    } else {
        halves_v
            .iter()
            .flat_map(|h| [Rect { s1: sm, ..*h }, Rect { s0: sm, ..*h }])
            .collect()
    }
}

/// Globally adaptive integration of a matrix field over a union of cells.
///
/// Refinement is deterministic: cells are chosen by error with ties broken
/// by creation order, each batch is evaluated in parallel, and results are
/// merged in a fixed order with compensated summation.
pub fn integrate_2d<M: MatrixField>(field: &M, initial: &[Rect], c: Controls2d) -> Result<Integral2d> {
    if !(c.fixed_error < c.tol) {
        return Err(Error::NonConvergence {
            estimate: c.fixed_error,
            tol: c.tol,
            cells: 0,
        });
    }
    let d = field.dim();
    let mut next_id = 0u64;
    let mut heap: BinaryHeap<Cell> = BinaryHeap::new();
    let mut retired = MatrixAccumulator::new(d, d);
    let mut retired_err = CompensatedSum::new();
    let mut evaluations = 0usize;
    let mut cells = 0usize;
    let mut live_err = CompensatedSum::new();

    let mut admit = |rects: Vec<(Rect, u32)>,
                     heap: &mut BinaryHeap<Cell>,
                     retired: &mut MatrixAccumulator,
                     retired_err: &mut CompensatedSum,
                     live_err: &mut CompensatedSum|
     -> Result<(usize, usize)> {
        let ests: Vec<Result<CellEstimate>> =
            rects.par_iter().map(|(r, _)| tensor_gk15(field, *r)).collect();
        let mut evals = 0;
        let n = rects.len();
        for ((rect, depth), est) in rects.into_iter().zip(ests) {
            let est = est?;
            evals += est.evaluations;
            if est.error <= c.tol * RETIRE {
                retired.add(&est.value);
                retired_err.add(est.error);
            } else {
                live_err.add(est.error);
                heap.push(Cell {
                    rect,
                    depth,
                    id: next_id,
                    est,
                });
                next_id += 1;
            }
        }
        Ok((n, evals))
    };

    let (n0, e0) = admit(
        initial.iter().map(|r| (*r, 0)).collect(),
        &mut heap,
        &mut retired,
        &mut retired_err,
        &mut live_err,
    )?;
    cells += n0;
    evaluations += e0;

    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds % 64 == 0 {
            live_err = heap.iter().map(|c| c.est.error).collect();
        }
        let total = c.fixed_error + retired_err.value() + live_err.value();
        if total <= c.tol || heap.is_empty() {
            break;
        }
        if cells >= c.max_cells {
            return Err(Error::NonConvergence {
                estimate: total,
                tol: c.tol,
                cells,
            });
        }
        let mut batch = Vec::new();
        let mut first_err = None;
        while let Some(top) = heap.peek() {
            let e = top.est.error;
            let lead = *first_err.get_or_insert(e);
            if batch.len() >= BATCH || e < 0.05 * lead {
                break;
            }
            let cell = heap.pop().expect("peeked");
            live_err.add(-cell.est.error);
            if cell.depth >= c.max_depth {
                retired.add(&cell.est.value);
                retired_err.add(cell.est.error);
                continue;
            }
            batch.push(cell);
        }
        let children: Vec<(Rect, u32)> = batch
            .iter()
            .flat_map(|cell| {
                split(cell.rect, &cell.est)
                    .into_iter()
                    .map(move |r| (r, cell.depth + 1))
            })
            .collect();
        let (n, e) = admit(children, &mut heap, &mut retired, &mut retired_err, &mut live_err)?;
        cells += n;
        evaluations += e;
    }

    let mut leaves = heap.into_vec();
    leaves.sort_by_key(|c| c.id);
    let mut acc = retired;
    let mut err = retired_err;
    for leaf in &leaves {
        acc.add(&leaf.est.value);
        err.add(leaf.est.error);
    }
    let error = c.fixed_error + err.value();
    let value = acc.value();
    if value.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Divergent("integrand produced non-finite values".into()));
    }
    if error > c.tol {
        return Err(Error::NonConvergence {
            estimate: error,
            tol: c.tol,
            cells,
        });
    }
    Ok(Integral2d {
        value,
        error,
        cells,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_weights_integrate_constants() {
        let k: f64 = GK15.kronrod.iter().sum();
        let g: f64 = GK15.gauss.iter().sum();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
        assert_eq!(GK15.gauss.iter().filter(|&&w| w != 0.0).count(), 7);
    }

    #[test]
    fn gauss_part_is_exact_to_degree_13() {
        for p in 0..=13 {
            let g: f64 = (0..15).map(|i| GK15.gauss[i] * GK15.nodes[i].powi(p)).sum();
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((g - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn kronrod_part_is_exact_to_degree_22() {
        for p in 0..=22 {
            let k: f64 = (0..15).map(|i| GK15.kronrod[i] * GK15.nodes[i].powi(p)).sum();
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((k - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn adaptive_handles_kinks_and_endpoint_singularities() {
        let r = integrate(|x: f64| (x - 0.3).abs(), &[0.0, 1.0], Controls::absolute(1e-12)).unwrap();
        assert!((r.value - 0.29).abs() < 1e-12);
        let r = integrate(|x: f64| 1.0 / x.sqrt(), &[0.0, 1.0], Controls::absolute(1e-9)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let c = Controls {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_intervals: 8,
        };
        assert!(matches!(
            integrate(|x: f64| 1.0 / x.sqrt(), &[0.0, 1.0], c),
            Err(Error::NonConvergence { .. })
        ));
    }

    struct Scalar<F>(F);
    impl<F: Fn(f64, f64) -> Complex64 + Sync> MatrixField for Scalar<F> {
        fn dim(&self) -> usize {
            1
        }
        fn column(&self, v: f64, s: &[f64; 15], out: &mut [Option<DMatrix<Complex64>>]) -> Result<()> {
            for (o, &sj) in out.iter_mut().zip(s) {
                *o = Some(DMatrix::from_element(1, 1, (self.0)(v, sj)));
            }
            Ok(())
        }
    }

    #[test]
    fn two_dimensional_smooth_and_cornered() {
        let unit = Rect {
            v0: 0.0,
            v1: 1.0,
            s0: 0.0,
            s1: 1.0,
        };
        let c = Controls2d {
            tol: 1e-10,
            fixed_error: 0.0,
            max_depth: 40,
            max_cells: 100_000,
        };
        let smooth = Scalar(|v: f64, s: f64| Complex64::new((v * s).exp(), v));
        let r = integrate_2d(&smooth, &[unit], c).unwrap();
        // int_0^1 int_0^1 e^{vs} = sum_k 1/(k! (k+1)^2)
        let mut exact = 0.0;
        let mut fact = 1.0;
        for k in 0..30 {
            if k > 0 {
                fact *= k as f64;
            }
            exact += 1.0 / (fact * ((k + 1) as f64).powi(2));
        }
        assert!((r.value[(0, 0)].re - exact).abs() < 1e-10);
        assert!((r.value[(0, 0)].im - 0.5).abs() < 1e-10);

        // bounded but discontinuous at the origin, like the resolvent term
        let corner = Scalar(|v: f64, s: f64| Complex64::new(s / (v * v + s * s).sqrt(), 0.0));
        let c = Controls2d { tol: 1e-8, ..c };
        let r = integrate_2d(&corner, &[unit], c).unwrap();
        // int_0^1 (sqrt(v^2 + 1) - v) dv
        let direct = 0.5 * (2f64.sqrt() + 1f64.asinh()) - 0.5;
        assert!((r.value[(0, 0)].re - direct).abs() < 1e-8, "{}", r.value[(0, 0)].re - direct);
    }
}
