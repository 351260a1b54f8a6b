use super::params::ParamStore;
use super::tape::Tensor;

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: Vec::new(), v: Vec::new() }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn step(&mut self, params: &mut ParamStore, grads: &[Tensor]) {
        assert_eq!(params.len(), grads.len(), "one gradient per parameter");
        if self.m.is_empty() {
            self.m = grads.iter().map(|g| Tensor::zeros(g.raw_dim())).collect();
            self.v = self.m.clone();
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        for (((p, g), m), v) in params.values_mut().iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            ndarray::Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    fn scalar(x: f64) -> ParamStore {
        let mut s = ParamStore::default();
        s.insert("theta", array![[x]]);
        s
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut s = scalar(1.5);
        let mut adam = Adam::new(0.001);
        for _ in 0..3 {
            adam.step(&mut s, &[array![[0.0]]]);
        }
        assert_eq!(s.value(0)[[0, 0]], 1.5);
    }

    #[test]
    fn first_step_has_magnitude_lr() {
        let mut s = scalar(0.0);
        let mut adam = Adam::new(0.001);
        adam.step(&mut s, &[array![[1.0]]]);
        let expected = -0.001 / (1.0 + 1e-8);
        assert!((s.value(0)[[0, 0]] - expected).abs() < 1e-18);
    }

    #[test]
    fn minimizes_a_parabola() {
        let mut s = scalar(1.0);
        let mut adam = Adam::new(0.01);
        for _ in 0..200 {
            let theta = s.value(0)[[0, 0]];
            adam.step(&mut s, &[array![[2.0 * theta]]]);
        }
        assert!(s.value(0)[[0, 0]].abs() < 0.1, "{}", s.value(0)[[0, 0]]);
    }
}
