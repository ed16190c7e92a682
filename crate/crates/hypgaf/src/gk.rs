//! Adaptive Gauss-Kronrod (G7/K15) panel quadrature with an embedded error
//! estimate. Internal engine shared by the variance integral and the
//! asymptotic-constant integral.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// 15-point Kronrod abscissae on [-1, 1]; index 0 is the center, the rest
/// are the positive nodes (negatives by symmetry).
const XGK: [f64; 8] = [
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
];

/// Kronrod weights aligned with `XGK`.
const WGK: [f64; 8] = [
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
];

/// 7-point Gauss weights for the embedded rule; aligned with `XGK` indices
/// 0, 2, 4, 6.
const WG: [f64; 4] = [
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
];

/// One evaluated panel.
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: u32,
}

/// Heap ordering: worst (largest) error first.
impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Errors are checked finite before insertion.
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(Ordering::Equal)
            .then_with(|| {
                self.a
                    .partial_cmp(&other.a)
                    .unwrap_or(Ordering::Equal)
                    .reverse()
            })
    }
}

/// Result of one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadOutcome {
    pub value: f64,
    pub err: f64,
    pub evaluations: usize,
}

/// Evaluate G7/K15 on `[a, b]`: returns (value, scaled error estimate).
fn eval_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut resk = WGK[0] * fc;
    let mut resg = WG[0] * fc;
    let mut resabs = WGK[0] * fc.abs();
    let mut fv = [[0.0f64; 2]; 8];
    fv[0] = [fc, fc];

    for j in 1..8 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = [f1, f2];
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 0 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }

    // Deviation-based rescaling of the raw Gauss/Kronrod difference, as in
    // the classic QUADPACK routines: trust |K - G| only up to what the
    // panel's own oscillation supports.
    let reskh = 0.5 * resk;
    let mut resasc = WGK[0] * (fc - reskh).abs();
    for j in 1..8 {
        resasc += WGK[j] * ((fv[j][0] - reskh).abs() + (fv[j][1] - reskh).abs());
    }
    let value = resk * half;
    let resabs_s = resabs * half.abs();
    let resasc_s = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc_s != 0.0 && err != 0.0 {
        err = resasc_s * (1.0f64).min((200.0 * err / resasc_s).powf(1.5));
    }
    let uflow = f64::MIN_POSITIVE;
    let eps = f64::EPSILON;
    if resabs_s > uflow / (50.0 * eps) {
        err = err.max(50.0 * eps * resabs_s);
    }
    (value, err)
}

/// Worst-panel-first adaptive integration over the union of the seed
/// intervals. `seeds` must be strictly increasing with at least two entries;
/// panels are bisected until the summed error estimate drops below
/// `max(abs_tol, rel_tol * |sum|)`.
pub(crate) fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    seeds: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<QuadOutcome> {
    debug_assert!(seeds.len() >= 2);
    debug_assert!(seeds.windows(2).all(|w| w[0] < w[1]));
    const MAX_PANELS: usize = 200_000;

    let mut heap: BinaryHeap<Panel> = BinaryHeap::new();
    let mut sum_val = 0.0f64;
    let mut sum_err = 0.0f64;
    let mut evaluations = 0usize;

    let push = |heap: &mut BinaryHeap<Panel>,
                    sum_val: &mut f64,
                    sum_err: &mut f64,
                    evals: &mut usize,
                    a: f64,
                    b: f64,
                    depth: u32|
     -> Result<()> {
        let (value, err) = eval_panel(&f, a, b);
        *evals += 15;
        if !value.is_finite() || !err.is_finite() {
            return Err(Error::NumericalInstability(format!(
                "non-finite quadrature panel on [{a}, {b}]"
            )));
        }
        *sum_val += value;
        *sum_err += err;
        heap.push(Panel {
            a,
            b,
            value,
            err,
            depth,
        });
        Ok(())
    };

    for w in seeds.windows(2) {
        push(
            &mut heap,
            &mut sum_val,
            &mut sum_err,
            &mut evaluations,
            w[0],
            w[1],
            0,
        )?;
    }

    loop {
        let tol = abs_tol.max(rel_tol * sum_val.abs());
        if sum_err <= tol {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        if worst.depth >= max_depth || heap.len() + 2 > MAX_PANELS {
            let achieved = if sum_val != 0.0 {
                sum_err / sum_val.abs()
            } else {
                sum_err
            };
            return Err(Error::ConvergenceFailure {
                achieved,
                required: rel_tol,
            });
        }
        sum_val -= worst.value;
        sum_err -= worst.err;
        let mid = 0.5 * (worst.a + worst.b);
        push(
            &mut heap,
            &mut sum_val,
            &mut sum_err,
            &mut evaluations,
            worst.a,
            mid,
            worst.depth + 1,
        )?;
        push(
            &mut heap,
            &mut sum_val,
            &mut sum_err,
            &mut evaluations,
            mid,
            worst.b,
            worst.depth + 1,
        )?;
    }

    // Deterministic final reduction: re-sum panels in interval order with
    // compensated summation, so the reported value does not depend on the
    // order in which the heap happened to refine.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(Ordering::Equal));
    let (mut val, mut val_c) = (0.0f64, 0.0f64);
    let (mut err, mut err_c) = (0.0f64, 0.0f64);
    for p in &panels {
        let y = p.value - val_c;
        let t = val + y;
        val_c = (t - val) - y;
        val = t;
        let y = p.err - err_c;
        let t = err + y;
        err_c = (t - err) - y;
        err = t;
    }
    Ok(QuadOutcome {
        value: val,
        err,
        evaluations,
    })
}
