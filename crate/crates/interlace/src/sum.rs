/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Coefficient-wise compensated accumulation of polynomials of bounded length.
#[derive(Debug, Clone)]
pub struct CompensatedPoly {
    acc: Vec<CompensatedSum>,
}

impl CompensatedPoly {
    pub fn new(len: usize) -> Self {
        CompensatedPoly { acc: vec![CompensatedSum::new(); len] }
    }

    /// Adds `scale * coeffs` (ascending order).
    pub fn add_scaled(&mut self, coeffs: &[f64], scale: f64) {
        if coeffs.len() > self.acc.len() {
            self.acc.resize(coeffs.len(), CompensatedSum::new());
        }
        for (a, &c) in self.acc.iter_mut().zip(coeffs) {
            a.add(scale * c);
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.acc.iter().map(|a| a.value()).collect()
    }
}
