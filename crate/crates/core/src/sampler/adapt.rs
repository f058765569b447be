//! Step-size dual averaging and windowed diagonal metric estimation.

/// Nesterov dual averaging on `log(step)`.
#[derive(Debug, Clone)]
pub struct DualAveraging {
    pub target: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub t0: f64,
    mu: f64,
    s_bar: f64,
    x_bar: f64,
    counter: f64,
}

impl DualAveraging {
    pub fn new(target: f64) -> Self {
        Self {
            target,
            gamma: 0.05,
            kappa: 0.75,
            t0: 10.0,
            mu: 0.0,
            s_bar: 0.0,
            x_bar: 0.0,
            counter: 0.0,
        }
    }

    /// Restarts the averaging around `10 * step`.
    pub fn restart(&mut self, step: f64) {
        self.mu = (10.0 * step).ln();
        self.s_bar = 0.0;
        self.x_bar = 0.0;
        self.counter = 0.0;
    }

    /// Feeds one acceptance statistic and returns the next step size.
    pub fn learn(&mut self, accept_stat: f64) -> f64 {
        self.counter += 1.0;
        let stat = accept_stat.min(1.0);
        let eta = 1.0 / (self.counter + self.t0);
        self.s_bar = (1.0 - eta) * self.s_bar + eta * (self.target - stat);
        let x = self.mu - self.s_bar * self.counter.sqrt() / self.gamma;
        let x_eta = self.counter.powf(-self.kappa);
        self.x_bar = (1.0 - x_eta) * self.x_bar + x_eta * x;
        x.exp()
    }

    /// Final step size: the exponentiated running average.
    pub fn final_step(&self) -> f64 {
        self.x_bar.exp()
    }
}

/// Welford accumulator for per-coordinate variances.
#[derive(Debug, Clone)]
struct Welford {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    fn add(&mut self, q: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(q) {
            let delta = v - *m;
            *m += delta / n;
            *s += delta * (v - *m);
        }
    }

    fn restart(&mut self) {
        self.n = 0;
        self.mean.fill(0.0);
        self.m2.fill(0.0);
    }
}

/// Windowed schedule: an initial fast buffer, doubling slow windows that
/// estimate the metric, and a terminal fast buffer.
#[derive(Debug, Clone)]
pub struct WindowedAdaptation {
    num_warmup: usize,
    init_buffer: usize,
    term_buffer: usize,
    window_size: usize,
    counter: usize,
    next_window: usize,
    estimator: Welford,
    enabled: bool,
}

impl WindowedAdaptation {
    pub const INIT_BUFFER: usize = 75;
    /// Floor for the terminal buffer, which otherwise takes a quarter of warmup.
    /// A long final step-size phase keeps the averaged step close to the
    /// acceptance target instead of drifting conservative.
    pub const TERM_BUFFER: usize = 50;
    pub const BASE_WINDOW: usize = 25;

    pub fn new(dim: usize, num_warmup: usize) -> Self {
        let term = Self::TERM_BUFFER.max(num_warmup / 4);
        let (mut init_buffer, mut term_buffer, mut base) = (Self::INIT_BUFFER, term, Self::BASE_WINDOW);
        let enabled = num_warmup >= 20;
        if enabled && init_buffer + base + term_buffer > num_warmup {
            init_buffer = (0.15 * num_warmup as f64) as usize;
            term_buffer = (0.1 * num_warmup as f64) as usize;
            base = num_warmup - (init_buffer + term_buffer);
        }
        Self {
            num_warmup,
            init_buffer,
            term_buffer,
            window_size: base,
            counter: 0,
            next_window: init_buffer + base - 1,
            estimator: Welford::new(dim),
            enabled,
        }
    }

    fn in_window(&self) -> bool {
        self.counter >= self.init_buffer
            && self.counter < self.num_warmup - self.term_buffer
            && self.counter != self.num_warmup
    }

    fn end_of_window(&self) -> bool {
        self.counter == self.next_window && self.counter != self.num_warmup
    }

    fn compute_next_window(&mut self) {
        let last = self.num_warmup - self.term_buffer - 1;
        if self.next_window == last {
            return;
        }
        self.window_size *= 2;
        self.next_window = self.counter + self.window_size;
        if self.next_window != last {
            let boundary = self.next_window + 2 * self.window_size;
            if boundary >= self.num_warmup - self.term_buffer {
                self.next_window = last;
            }
        }
    }

    /// Records a warmup position; returns `true` when a window closed and
    /// `inv_metric` was replaced by the regularized variance estimate.
    pub fn learn(&mut self, inv_metric: &mut [f64], q: &[f64]) -> bool {
        if !self.enabled {
            return false;
        }
        if self.in_window() {
            self.estimator.add(q);
        }
        if self.end_of_window() {
            self.compute_next_window();
            let n = self.estimator.n as f64;
            if self.estimator.n >= 2 {
                for (v, m2) in inv_metric.iter_mut().zip(&self.estimator.m2) {
                    let var = m2 / (n - 1.0);
                    *v = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
                }
            }
            self.estimator.restart();
            self.counter += 1;
            return true;
        }
        self.counter += 1;
        false
    }

    /// Warmup iterations (1-based) at which metric windows close.
    pub fn window_ends(dim: usize, num_warmup: usize) -> Vec<usize> {
        let mut w = Self::new(dim, num_warmup);
        let mut metric = vec![1.0; dim];
        let q = vec![0.0; dim];
        (1..=num_warmup).filter(|_| w.learn(&mut metric, &q)).collect()
    }
}
