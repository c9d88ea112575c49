use crate::{Error, Result};

/// Adam hyperparameters. `decoupled_decay` selects where the weight-decay
/// term enters: false adds `lambda * p` to the gradient before the moment
/// updates (classic L2), true applies `lr * lambda * p` directly to the
/// parameter after the Adam step.
#[derive(Debug, Clone, Copy)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub decoupled_decay: bool,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            decoupled_decay: false,
        }
    }
}

impl AdamHyper {
    pub fn with_lr(lr: f64, weight_decay: f64) -> Self {
        AdamHyper {
            lr,
            weight_decay,
            ..AdamHyper::default()
        }
    }
}

/// Per-tensor optimizer state: first/second moments and the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub hyper: AdamHyper,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(len: usize, hyper: AdamHyper) -> Self {
        AdamState {
            hyper,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam update with bias correction, in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], st: &mut AdamState) -> Result<()> {
    if params.len() != grads.len() || params.len() != st.m.len() {
        return Err(Error::shape(
            "adam_step",
            format!(
                "params {} vs grads {} vs state {}",
                params.len(),
                grads.len(),
                st.m.len()
            ),
        ));
    }
    let h = st.hyper;
    st.t += 1;
    let bc1 = 1.0 - h.beta1.powi(st.t as i32);
    let bc2 = 1.0 - h.beta2.powi(st.t as i32);
    for ((p, &g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(st.m.iter_mut().zip(st.v.iter_mut()))
    {
        let g_eff = if h.decoupled_decay {
            g
        } else {
            g + h.weight_decay * *p
        };
        *m = h.beta1 * *m + (1.0 - h.beta1) * g_eff;
        *v = h.beta2 * *v + (1.0 - h.beta2) * g_eff * g_eff;
        let update = (*m / bc1) / ((*v / bc2).sqrt() + h.eps);
        if h.decoupled_decay {
            *p -= h.lr * (update + h.weight_decay * *p);
        } else {
            *p -= h.lr * update;
        }
    }
    Ok(())
}
