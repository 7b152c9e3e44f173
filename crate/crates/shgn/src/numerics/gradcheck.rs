use crate::error::{Result, ShgnError};
use crate::numerics::params::{GradStore, ParamId, ParamStore};

/// Whether a gradient-check evaluation needs the backward pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradMode {
    ValueOnly,
    WithGrads,
}

/// One evaluation of the checked scalar function.
pub struct LossEval {
    pub value: f64,
    pub grads: Option<GradStore>,
}

#[derive(Debug)]
pub struct GradCheckFailure {
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

#[derive(Debug)]
pub struct GradCheckReport {
    pub entries_checked: usize,
    pub max_rel_err: f64,
    pub failures: Vec<GradCheckFailure>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares analytic gradients of a deterministic scalar function against
/// central finite differences for every entry of every parameter.
///
/// A parameter entry passes when
/// `|analytic - (f(x+eps)-f(x-eps))/2eps| / max(1, |analytic|) <= tol`;
/// offenders are listed in the report. Non-finite values anywhere abort with
/// an error.
pub fn grad_check<F>(
    store: &mut ParamStore,
    mut f: F,
    eps: f64,
    tol: f64,
) -> Result<GradCheckReport>
where
    F: FnMut(&ParamStore, GradMode) -> Result<LossEval>,
{
    let base = f(store, GradMode::WithGrads)?;
    if !base.value.is_finite() {
        return Err(ShgnError::NonFinite("grad_check base value".into()));
    }
    let grads = base
        .grads
        .ok_or_else(|| ShgnError::Invalid("grad_check needs analytic gradients".into()))?;

    let mut report = GradCheckReport {
        entries_checked: 0,
        max_rel_err: 0.0,
        failures: Vec::new(),
    };

    for pidx in 0..store.len() {
        let id = ParamId(pidx);
        let entries = store.get(id).len();
        for i in 0..entries {
            let original = store.get(id).data()[i];

            store.get_mut(id).data_mut()[i] = original + eps;
            let plus = f(store, GradMode::ValueOnly)?.value;
            store.get_mut(id).data_mut()[i] = original - eps;
            let minus = f(store, GradMode::ValueOnly)?.value;
            store.get_mut(id).data_mut()[i] = original;

            if !plus.is_finite() || !minus.is_finite() {
                return Err(ShgnError::NonFinite(format!(
                    "grad_check perturbation of {}[{}]",
                    store.name(id),
                    i
                )));
            }

            let numeric = (plus - minus) / (2.0 * eps);
            let analytic = grads.get(id).map_or(0.0, |g| g.data()[i]);
            let rel = (analytic - numeric).abs() / analytic.abs().max(1.0);
            report.entries_checked += 1;
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
            }
            if rel > tol {
                report.failures.push(GradCheckFailure {
                    param: store.name(id).to_string(),
                    index: i,
                    analytic,
                    numeric,
                    rel_err: rel,
                });
            }
        }
    }
    Ok(report)
}
