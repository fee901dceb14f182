use num_traits::Float;

/// Arguments beyond this magnitude saturate the sigmoid table.
pub const MAX_EXP: f64 = 6.0;
pub const SIGMOID_TABLE_SIZE: usize = 1000;

/// Logistic function, either exact or from a lookup table over
/// `[-MAX_EXP, MAX_EXP]` that saturates to 0/1 outside.
#[derive(Debug, Clone)]
pub struct Sigmoid {
    table: Option<Vec<f64>>,
}

impl Sigmoid {
    pub fn exact() -> Self {
        Sigmoid { table: None }
    }

    pub fn table() -> Self {
        let table = (0..SIGMOID_TABLE_SIZE)
            .map(|i| {
                let x = (i as f64 / SIGMOID_TABLE_SIZE as f64 * 2.0 - 1.0) * MAX_EXP;
                1.0 / (1.0 + (-x).exp())
            })
            .collect();
        Sigmoid { table: Some(table) }
    }

    pub fn is_exact(&self) -> bool {
        self.table.is_none()
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.table {
            None => 1.0 / (1.0 + (-x).exp()),
            Some(table) => {
                if x >= MAX_EXP {
                    1.0
                } else if x <= -MAX_EXP {
                    0.0
                } else {
                    let i = ((x + MAX_EXP) * (SIGMOID_TABLE_SIZE as f64 / MAX_EXP / 2.0)) as usize;
                    table[i.min(SIGMOID_TABLE_SIZE - 1)]
                }
            }
        }
    }
}

/// One logistic SGD step on a (center, context-or-noise) pair.
///
/// With `s = σ(u·v)` and `g = label - s`, applies `u += lr·g·v` and
/// `v += lr·g·u` using the pre-update vectors. Returns `g`.
pub fn sgd_pair_update<T: Float>(
    center: &mut [T],
    context: &mut [T],
    label: T,
    lr: T,
    sigmoid: &Sigmoid,
) -> T {
    debug_assert_eq!(center.len(), context.len());
    let dot = center
        .iter()
        .zip(context.iter())
        .fold(T::zero(), |acc, (&v, &u)| acc + v * u);
    let s = T::from(sigmoid.eval(dot.to_f64().unwrap_or(0.0))).unwrap_or_else(T::zero);
    let g = label - s;
    let step = lr * g;
    if step == T::zero() {
        return g;
    }
    for (v, u) in center.iter_mut().zip(context.iter_mut()) {
        let (v0, u0) = (*v, *u);
        *u = u0 + step * v0;
        *v = v0 + step * u0;
    }
    g
}

/// Logistic pair loss `-[label ln σ(u·v) + (1 - label) ln(1 - σ(u·v))]`.
pub fn pair_loss(center: &[f64], context: &[f64], label: f64) -> f64 {
    let dot: f64 = center.iter().zip(context).map(|(v, u)| v * u).sum();
    // ln σ(x) = -ln(1 + e^-x), ln(1 - σ(x)) = -ln(1 + e^x)
    label * (-dot).exp().ln_1p() + (1.0 - label) * dot.exp().ln_1p()
}
