//! Running moments, fixed-order reductions and least squares.

/// Count, mean and centred second moment of a sample.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        Moments {
            count: n,
            mean: self.mean + delta * nb / n as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n as f64,
        }
    }

    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn variance_of_mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sample_variance() / self.count as f64
        }
    }
}

/// Reduces `items` as a balanced binary tree in index order. The tree shape
/// depends only on `items.len()`.
pub fn pairwise_reduce<T: Clone>(items: &[T], identity: T, merge: &impl Fn(&T, &T) -> T) -> T {
    match items.len() {
        0 => identity,
        1 => items[0].clone(),
        n => {
            let (left, right) = items.split_at(n / 2);
            merge(
                &pairwise_reduce(left, identity.clone(), merge),
                &pairwise_reduce(right, identity, merge),
            )
        }
    }
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_reduce(values, 0.0, &|a, b| a + b)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = pairwise_sum(x) / n as f64;
    let my = pairwise_sum(y) / n as f64;
    let sxx: Vec<f64> = x.iter().map(|xi| (xi - mx) * (xi - mx)).collect();
    let sxy: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (xi - mx) * (yi - my))
        .collect();
    let sxx = pairwise_sum(&sxx);
    if sxx == 0.0 {
        return None;
    }
    let slope = pairwise_sum(&sxy) / sxx;
    let intercept = my - slope * mx;
    let max_residual = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - intercept - slope * xi).abs())
        .fold(0.0, f64::max);
    Some(LineFit {
        slope,
        intercept,
        max_residual,
    })
}
