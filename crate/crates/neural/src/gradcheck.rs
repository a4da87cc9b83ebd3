//! Central finite-difference gradient checking.
//!
//! The numeric side only ever evaluates the forward pass, so it is
//! independent of every backward rule on the tape.

use crate::tape::{NodeId, Tape};
use crate::tensor::Params;

/// Default perturbation for central differences.
pub const FD_STEP: f64 = 1e-5;

/// Relative errors are computed against `max(|analytic|, |numeric|, REL_FLOOR)`
/// so that gradients near zero are compared on an absolute scale.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub checked: usize,
    /// `(parameter name, flat index, analytic, numeric)` of the worst entry.
    pub worst: Option<(String, usize, f64, f64)>,
}

/// Compares backprop gradients of the scalar produced by `loss` against
/// central differences for every scalar in `params`.
pub fn check_gradients<F>(params: &mut Params, step: f64, loss: F) -> GradCheckReport
where
    F: Fn(&mut Tape, &Params) -> NodeId,
{
    params.zero_grad();
    let mut tape = Tape::new();
    let out = loss(&mut tape, params);
    tape.backward(out, params);
    let analytic: Vec<Vec<f64>> = params
        .ids()
        .map(|id| params.get(id).grad().map(<[f64]>::to_vec).unwrap_or_default())
        .collect();

    let eval = |params: &Params| {
        let mut tape = Tape::new();
        let out = loss(&mut tape, params);
        tape.scalar(out)
    };

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        checked: 0,
        worst: None,
    };
    let ids: Vec<_> = params.ids().collect();
    for (pi, id) in ids.into_iter().enumerate() {
        for k in 0..params.get(id).len() {
            let orig = params.get(id).data()[k];
            params.get_mut(id).data_mut()[k] = orig + step;
            let up = eval(params);
            params.get_mut(id).data_mut()[k] = orig - step;
            let down = eval(params);
            params.get_mut(id).data_mut()[k] = orig;

            let numeric = (up - down) / (2.0 * step);
            let a = analytic[pi][k];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
            report.checked += 1;
            if report.worst.is_none() || rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst = Some((params.name(id).to_string(), k, a, numeric));
            }
        }
    }
    report
}
