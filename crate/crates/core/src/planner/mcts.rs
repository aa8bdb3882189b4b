//! Monte Carlo Tree Search with vector rewards.
//!
//! Selection computes a UCT vector per action: each dimension's mean return
//! is rescaled to `[0, 1]` using the smallest and largest return backed up
//! through the node, then the exploration bonus is added. Actions are
//! ranked by thresholded lexicographic order, with thresholds rescaled by
//! the same map. Ties between maximal actions are broken uniformly at random.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::reward::RewardVector;
use super::tlo::{lexicographic, maximal_set};

/// Result of applying one action.
#[derive(Debug, Clone)]
pub struct Outcome<S> {
    pub state: S,
    pub reward: RewardVector,
    pub terminal: bool,
}

/// A deterministic sequential decision problem with a fixed action set.
pub trait SearchProblem {
    type State: Clone;

    fn num_actions(&self) -> usize;

    fn dims(&self) -> usize;

    fn is_terminal(&self, s: &Self::State) -> bool;

    fn step(&self, s: &Self::State, action: usize) -> Outcome<Self::State>;

    /// Default policy used during rollouts.
    fn rollout_action(&self, s: &Self::State, rng: &mut ChaCha8Rng) -> usize;
}

#[derive(Debug, Clone, PartialEq)]
pub struct MctsParams {
    pub iterations: usize,
    pub exploration: f64,
    pub discount: f64,
    pub thresholds: RewardVector,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("root state is terminal")]
    TerminalRoot,
    #[error("problem has no actions")]
    NoActions,
    #[error("thresholds have {thresholds} entries, rewards have {dims}")]
    Thresholds { thresholds: usize, dims: usize },
    #[error("at least one iteration is required")]
    NoIterations,
}

/// Visit count and mean return of one action at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionStats {
    pub visits: u64,
    pub q: RewardVector,
}

#[derive(Debug, Clone)]
struct Edge {
    child: usize,
    stats: ActionStats,
    reward: RewardVector,
}

#[derive(Debug, Clone)]
struct Node<S> {
    state: S,
    terminal: bool,
    /// One more than the backups through this node.
    visits: u64,
    edges: Vec<Edge>,
    lo: RewardVector,
    hi: RewardVector,
}

/// Root statistics returned with the chosen action.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub action: usize,
    pub root: Vec<ActionStats>,
    pub nodes: usize,
}

fn normalize(x: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (x - lo) / (hi - lo)
    } else {
        0.5
    }
}

fn normalize_threshold(tau: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (tau - lo) / (hi - lo)
    } else if tau < lo {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    }
}

/// Picks uniformly among `candidates`, consuming randomness only when there
/// is a real choice.
fn pick(candidates: &[usize], rng: &mut ChaCha8Rng) -> usize {
    if candidates.len() == 1 {
        candidates[0]
    } else {
        candidates[rng.gen_range(0..candidates.len())]
    }
}

/// Maximal elements under TLO, or the lexicographic maxima when the order
/// has no maximal element.
fn best(vectors: &[RewardVector], tau: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let refs: Vec<&[f64]> = vectors.iter().map(|v| &**v).collect();
    let mut cands = maximal_set(&refs, tau);
    if cands.is_empty() {
        let top = (0..refs.len())
            .max_by(|&a, &b| lexicographic(refs[a], refs[b]))
            .unwrap();
        cands = (0..refs.len())
            .filter(|&a| lexicographic(refs[a], refs[top]).is_eq())
            .collect();
    }
    pick(&cands, rng)
}

/// Per-dimension UCT selection. `lo`/`hi` bound the returns seen at the
/// node; an action with no visits gets an infinite bonus.
#[allow(clippy::too_many_arguments)]
pub fn uct_select(
    stats: &[ActionStats],
    node_visits: u64,
    lo: &[f64],
    hi: &[f64],
    exploration: f64,
    thresholds: &[f64],
    rng: &mut ChaCha8Rng,
) -> usize {
    let dims = thresholds.len();
    let ln_n = (node_visits as f64).ln();
    let u: Vec<RewardVector> = stats
        .iter()
        .map(|s| {
            if s.visits == 0 {
                return RewardVector::filled(dims, f64::INFINITY);
            }
            let bonus = exploration * (ln_n / s.visits as f64).sqrt();
            let mut v = RewardVector::zeros(dims);
            for i in 0..dims {
                v[i] = normalize(s.q[i], lo[i], hi[i]) + bonus;
            }
            v
        })
        .collect();
    let tau: Vec<f64> = (0..dims)
        .map(|i| normalize_threshold(thresholds[i], lo[i], hi[i]))
        .collect();
    best(&u, &tau, rng)
}

/// Search tree for one planning call.
pub struct Mcts<'a, P: SearchProblem> {
    problem: &'a P,
    params: MctsParams,
    nodes: Vec<Node<P::State>>,
    rng: ChaCha8Rng,
}

impl<'a, P: SearchProblem> Mcts<'a, P> {
    pub fn new(problem: &'a P, root: P::State, params: MctsParams) -> Result<Self, PlanError> {
        let dims = problem.dims();
        if problem.num_actions() == 0 {
            return Err(PlanError::NoActions);
        }
        if params.thresholds.len() != dims {
            return Err(PlanError::Thresholds {
                thresholds: params.thresholds.len(),
                dims,
            });
        }
        if params.iterations == 0 {
            return Err(PlanError::NoIterations);
        }
        if problem.is_terminal(&root) {
            return Err(PlanError::TerminalRoot);
        }
        let rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut mcts = Mcts {
            problem,
            params,
            nodes: Vec::new(),
            rng,
        };
        mcts.push_node(root, false);
        Ok(mcts)
    }

    fn push_node(&mut self, state: P::State, terminal: bool) -> usize {
        let dims = self.problem.dims();
        self.nodes.push(Node {
            state,
            terminal,
            visits: 1,
            edges: Vec::new(),
            lo: RewardVector::filled(dims, f64::INFINITY),
            hi: RewardVector::filled(dims, f64::NEG_INFINITY),
        });
        self.nodes.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Discounted return of the default policy from `state`.
    pub fn rollout(&mut self, state: &P::State) -> RewardVector {
        rollout(self.problem, state, self.params.discount, &mut self.rng)
    }

    fn iterate(&mut self) {
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut cur = 0;
        let dims = self.problem.dims();
        let leaf = loop {
            let node = &self.nodes[cur];
            if node.terminal {
                break RewardVector::zeros(dims);
            }
            if node.edges.len() < self.problem.num_actions() {
                let a = node.edges.len();
                let out = self.problem.step(&node.state, a);
                let value = if out.terminal {
                    RewardVector::zeros(dims)
                } else {
                    self.rollout(&out.state)
                };
                let child = self.push_node(out.state, out.terminal);
                self.nodes[cur].edges.push(Edge {
                    child,
                    stats: ActionStats {
                        visits: 0,
                        q: RewardVector::zeros(dims),
                    },
                    reward: out.reward,
                });
                path.push((cur, a));
                break value;
            }
            let stats: Vec<ActionStats> = node.edges.iter().map(|e| e.stats).collect();
            let a = uct_select(
                &stats,
                node.visits,
                &node.lo,
                &node.hi,
                self.params.exploration,
                &self.params.thresholds,
                &mut self.rng,
            );
            path.push((cur, a));
            cur = self.nodes[cur].edges[a].child;
        };
        self.backup(&path, leaf);
    }

    /// Propagates `value` (the return observed below the last edge) up
    /// `path`, discounting once per edge.
    fn backup(&mut self, path: &[(usize, usize)], value: RewardVector) {
        let gamma = self.params.discount;
        let mut g = value;
        for &(n, a) in path.iter().rev() {
            let node = &mut self.nodes[n];
            let edge = &mut node.edges[a];
            let mut ret = edge.reward;
            ret.add_scaled(&g, gamma);
            g = ret;
            edge.stats.visits += 1;
            let k = edge.stats.visits as f64;
            for i in 0..g.len() {
                edge.stats.q[i] += (g[i] - edge.stats.q[i]) / k;
                node.lo[i] = node.lo[i].min(g[i]);
                node.hi[i] = node.hi[i].max(g[i]);
            }
            node.visits += 1;
        }
    }

    /// Runs the configured number of iterations and returns the best root
    /// action by mean return, without exploration bonus.
    pub fn search(mut self) -> PlanResult {
        for _ in 0..self.params.iterations {
            self.iterate();
        }
        let root = &self.nodes[0];
        let visited: Vec<usize> = (0..root.edges.len())
            .filter(|&a| root.edges[a].stats.visits > 0)
            .collect();
        let qs: Vec<RewardVector> = visited.iter().map(|&a| root.edges[a].stats.q).collect();
        let stats = root.edges.iter().map(|e| e.stats).collect();
        let thresholds = self.params.thresholds;
        let choice = visited[best(&qs, &thresholds, &mut self.rng)];
        PlanResult {
            action: choice,
            root: stats,
            nodes: self.nodes.len(),
        }
    }
}

/// Discounted return of `problem`'s default policy from `state` until a
/// terminal state.
pub fn rollout<P: SearchProblem>(
    problem: &P,
    state: &P::State,
    discount: f64,
    rng: &mut ChaCha8Rng,
) -> RewardVector {
    let mut total = RewardVector::zeros(problem.dims());
    let mut weight = 1.0;
    let mut s = state.clone();
    while !problem.is_terminal(&s) {
        let a = problem.rollout_action(&s, rng);
        let out = problem.step(&s, a);
        total.add_scaled(&out.reward, weight);
        weight *= discount;
        if out.terminal {
            break;
        }
        s = out.state;
    }
    total
}

/// Plans one action from `root`.
pub fn plan<P: SearchProblem>(
    problem: &P,
    root: P::State,
    params: MctsParams,
) -> Result<PlanResult, PlanError> {
    Ok(Mcts::new(problem, root, params)?.search())
}
