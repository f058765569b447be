//! Multinomial no-U-turn transitions with the generalized termination
//! criterion.

use rand::Rng;
use rand_distr::StandardNormal;

use super::LogDensity;

/// Energy error above which a trajectory is flagged divergent.
pub const MAX_DELTA_H: f64 = 1000.0;

/// Position, momentum and cached log-density gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub gradient: Vec<f64>,
    pub log_density: f64,
}

impl PhasePoint {
    /// Evaluates the model at `position` with zero momentum.
    pub fn new<M: LogDensity + ?Sized>(model: &M, position: Vec<f64>) -> Self {
        let dim = position.len();
        let mut gradient = vec![0.0; dim];
        let log_density = model.log_density_and_gradient(&position, &mut gradient);
        Self {
            position,
            momentum: vec![0.0; dim],
            gradient,
            log_density,
        }
    }

    pub fn kinetic(&self, inv_metric: &[f64]) -> f64 {
        0.5 * self.momentum.iter().zip(inv_metric).map(|(p, m)| p * p * m).sum::<f64>()
    }

    /// `-log p(q) + K(p)`; NaN is mapped to `+inf`.
    pub fn hamiltonian(&self, inv_metric: &[f64]) -> f64 {
        let h = -self.log_density + self.kinetic(inv_metric);
        if h.is_nan() {
            f64::INFINITY
        } else {
            h
        }
    }

    /// Velocity `M^{-1} p`.
    pub fn velocity(&self, inv_metric: &[f64]) -> Vec<f64> {
        self.momentum.iter().zip(inv_metric).map(|(p, m)| p * m).collect()
    }

    pub fn resample_momentum<R: Rng + ?Sized>(&mut self, rng: &mut R, inv_metric: &[f64]) {
        for (p, m) in self.momentum.iter_mut().zip(inv_metric) {
            let z: f64 = rng.sample(StandardNormal);
            *p = z / m.sqrt();
        }
    }
}

/// One leapfrog step of size `step` under the diagonal metric.
pub fn leapfrog<M: LogDensity + ?Sized>(model: &M, point: &mut PhasePoint, step: f64, inv_metric: &[f64]) {
    if step == 0.0 {
        return;
    }
    let half = 0.5 * step;
    for (p, g) in point.momentum.iter_mut().zip(&point.gradient) {
        *p += half * g;
    }
    for ((q, p), m) in point.position.iter_mut().zip(&point.momentum).zip(inv_metric) {
        *q += step * m * p;
    }
    point.log_density = model.log_density_and_gradient(&point.position, &mut point.gradient);
    for (p, g) in point.momentum.iter_mut().zip(&point.gradient) {
        *p += half * g;
    }
}

/// Outcome of one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionStats {
    pub accept_stat: f64,
    pub n_leapfrog: usize,
    pub tree_depth: usize,
    pub divergent: bool,
    pub energy: f64,
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn no_u_turn(v_minus: &[f64], v_plus: &[f64], rho: &[f64]) -> bool {
    dot(v_plus, rho) > 0.0 && dot(v_minus, rho) > 0.0
}

/// Edge vectors of a (sub)trajectory.
struct Edge {
    p_beg: Vec<f64>,
    v_beg: Vec<f64>,
    p_end: Vec<f64>,
    v_end: Vec<f64>,
}

struct Tree<'a, M: ?Sized, R: ?Sized> {
    model: &'a M,
    rng: &'a mut R,
    inv_metric: &'a [f64],
    step: f64,
    h0: f64,
    n_leapfrog: usize,
    sum_metro_prob: f64,
    divergent: bool,
}

impl<M: LogDensity + ?Sized, R: Rng + ?Sized> Tree<'_, M, R> {
    /// Extends `z` by `2^depth` steps in `direction`. On return `propose`
    /// holds the subtree's multinomial sample, `rho` has the summed momenta
    /// added and `log_weight` the subtree weight merged in.
    #[allow(clippy::too_many_arguments)]
    fn build(
        &mut self,
        depth: usize,
        z: &mut PhasePoint,
        propose: &mut PhasePoint,
        edge: &mut Edge,
        rho: &mut [f64],
        direction: f64,
        log_weight: &mut f64,
    ) -> bool {
        if depth == 0 {
            leapfrog(self.model, z, direction * self.step, self.inv_metric);
            self.n_leapfrog += 1;
            let h = z.hamiltonian(self.inv_metric);
            if h - self.h0 > MAX_DELTA_H {
                self.divergent = true;
            }
            *log_weight = log_sum_exp(*log_weight, self.h0 - h);
            self.sum_metro_prob += if self.h0 - h > 0.0 { 1.0 } else { (self.h0 - h).exp() };
            propose.clone_from(z);
            let v = z.velocity(self.inv_metric);
            edge.v_beg.clone_from(&v);
            edge.v_end = v;
            for (r, p) in rho.iter_mut().zip(&z.momentum) {
                *r += p;
            }
            edge.p_beg.clone_from(&z.momentum);
            edge.p_end.clone_from(&z.momentum);
            return !self.divergent;
        }
        let dim = z.position.len();
        let empty = || Edge {
            p_beg: vec![0.0; dim],
            v_beg: vec![0.0; dim],
            p_end: vec![0.0; dim],
            v_end: vec![0.0; dim],
        };

        let mut init = empty();
        let mut rho_init = vec![0.0; dim];
        let mut lw_init = f64::NEG_INFINITY;
        if !self.build(depth - 1, z, propose, &mut init, &mut rho_init, direction, &mut lw_init) {
            return false;
        }

        let mut propose_final = z.clone();
        let mut fin = empty();
        let mut rho_final = vec![0.0; dim];
        let mut lw_final = f64::NEG_INFINITY;
        if !self.build(depth - 1, z, &mut propose_final, &mut fin, &mut rho_final, direction, &mut lw_final) {
            return false;
        }

        let lw_subtree = log_sum_exp(lw_init, lw_final);
        *log_weight = log_sum_exp(*log_weight, lw_subtree);
        if lw_final > lw_subtree {
            *propose = propose_final;
        } else {
            let accept = (lw_final - lw_subtree).exp();
            if self.rng.random::<f64>() < accept {
                *propose = propose_final;
            }
        }

        let rho_subtree = add(&rho_init, &rho_final);
        for (r, s) in rho.iter_mut().zip(&rho_subtree) {
            *r += s;
        }
        let mut persist = no_u_turn(&init.v_beg, &fin.v_end, &rho_subtree);
        persist &= no_u_turn(&init.v_beg, &fin.v_beg, &add(&rho_init, &fin.p_beg));
        persist &= no_u_turn(&init.v_end, &fin.v_end, &add(&rho_final, &init.p_end));

        edge.p_beg = init.p_beg;
        edge.v_beg = init.v_beg;
        edge.p_end = fin.p_end;
        edge.v_end = fin.v_end;
        persist
    }
}

/// One multinomial NUTS transition from `current` (momentum is resampled).
pub fn transition<M: LogDensity + ?Sized, R: Rng + ?Sized>(
    model: &M,
    current: &mut PhasePoint,
    step: f64,
    inv_metric: &[f64],
    max_depth: usize,
    rng: &mut R,
) -> TransitionStats {
    let dim = current.position.len();
    current.resample_momentum(rng, inv_metric);
    let h0 = current.hamiltonian(inv_metric);

    let v0 = current.velocity(inv_metric);
    let mut z_fwd = current.clone();
    let mut z_bck = current.clone();
    // Outer edges of the whole trajectory and the inner edges adjacent to
    // the most recent expansion.
    let mut v_fwd_fwd = v0.clone();
    let (mut p_fwd_bck, mut v_fwd_bck) = (current.momentum.clone(), v0.clone());
    let (mut p_bck_fwd, mut v_bck_fwd) = (current.momentum.clone(), v0.clone());
    let mut v_bck_bck = v0;
    let mut rho = current.momentum.clone();
    let mut log_weight = 0.0;
    let mut sample = current.clone();

    let mut tree = Tree {
        model,
        rng,
        inv_metric,
        step,
        h0,
        n_leapfrog: 0,
        sum_metro_prob: 0.0,
        divergent: false,
    };
    let mut depth = 0;
    while depth < max_depth {
        let mut rho_fwd = vec![0.0; dim];
        let mut rho_bck = vec![0.0; dim];
        let mut lw_subtree = f64::NEG_INFINITY;
        let mut propose = current.clone();
        let valid;
        if tree.rng.random::<f64>() < 0.5 {
            rho_bck.clone_from(&rho);
            p_bck_fwd.clone_from(&p_fwd_bck);
            v_bck_fwd.clone_from(&v_fwd_bck);
            let mut edge = Edge {
                p_beg: vec![0.0; dim],
                v_beg: vec![0.0; dim],
                p_end: vec![0.0; dim],
                v_end: vec![0.0; dim],
            };
            valid = tree.build(depth, &mut z_fwd, &mut propose, &mut edge, &mut rho_fwd, 1.0, &mut lw_subtree);
            p_fwd_bck = edge.p_beg;
            v_fwd_bck = edge.v_beg;
            v_fwd_fwd = edge.v_end;
        } else {
            rho_fwd.clone_from(&rho);
            p_fwd_bck.clone_from(&p_bck_fwd);
            v_fwd_bck.clone_from(&v_bck_fwd);
            let mut edge = Edge {
                p_beg: vec![0.0; dim],
                v_beg: vec![0.0; dim],
                p_end: vec![0.0; dim],
                v_end: vec![0.0; dim],
            };
            valid = tree.build(depth, &mut z_bck, &mut propose, &mut edge, &mut rho_bck, -1.0, &mut lw_subtree);
            p_bck_fwd = edge.p_beg;
            v_bck_fwd = edge.v_beg;
            v_bck_bck = edge.v_end;
        }
        if !valid {
            break;
        }
        depth += 1;

        if lw_subtree > log_weight {
            sample = propose;
        } else {
            let accept = (lw_subtree - log_weight).exp();
            if tree.rng.random::<f64>() < accept {
                sample = propose;
            }
        }
        log_weight = log_sum_exp(log_weight, lw_subtree);

        rho = add(&rho_bck, &rho_fwd);
        let mut persist = no_u_turn(&v_bck_bck, &v_fwd_fwd, &rho);
        persist &= no_u_turn(&v_bck_bck, &v_fwd_bck, &add(&rho_bck, &p_fwd_bck));
        persist &= no_u_turn(&v_bck_fwd, &v_fwd_fwd, &add(&rho_fwd, &p_bck_fwd));
        if !persist {
            break;
        }
    }

    let n_leapfrog = tree.n_leapfrog;
    let accept_stat = if n_leapfrog > 0 { tree.sum_metro_prob / n_leapfrog as f64 } else { 0.0 };
    let divergent = tree.divergent;
    let energy = sample.hamiltonian(inv_metric);
    *current = sample;
    TransitionStats {
        accept_stat,
        n_leapfrog,
        tree_depth: depth,
        divergent,
        energy,
    }
}
