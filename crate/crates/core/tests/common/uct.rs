//! Seeded toy search problems and a scalar UCT reference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rulemcts::planner::{Outcome, RewardVector, SearchProblem};

/// Random finite tree: rewards and crashes are a hash of the path.
#[derive(Debug, Clone)]
pub struct ToyTree {
    pub seed: u64,
    pub actions: usize,
    pub depth: usize,
    /// Multiplier applied to every reward.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyState {
    pub depth: usize,
    pub code: u64,
    pub crashed: bool,
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 33)).wrapping_mul(0xff51_afd7_ed55_8ccd);
    z = (z ^ (z >> 33)).wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    z ^ (z >> 33)
}

impl ToyTree {
    pub fn root(&self) -> ToyState {
        ToyState {
            depth: 0,
            code: mix(self.seed),
            crashed: false,
        }
    }

    /// Scalar transition: next state and reward.
    pub fn transition(&self, s: &ToyState, a: usize) -> (ToyState, f64) {
        let code = mix(s.code ^ (a as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let crashed = code.is_multiple_of(7);
        let reward = if crashed {
            -5.0
        } else {
            (code % 1000) as f64 / 500.0 - 1.0
        };
        (
            ToyState {
                depth: s.depth + 1,
                code,
                crashed,
            },
            reward * self.scale,
        )
    }

    pub fn terminal(&self, s: &ToyState) -> bool {
        s.crashed || s.depth >= self.depth
    }
}

impl SearchProblem for ToyTree {
    type State = ToyState;

    fn num_actions(&self) -> usize {
        self.actions
    }

    fn dims(&self) -> usize {
        1
    }

    fn is_terminal(&self, s: &ToyState) -> bool {
        self.terminal(s)
    }

    fn step(&self, s: &ToyState, a: usize) -> Outcome<ToyState> {
        let (next, r) = self.transition(s, a);
        Outcome {
            terminal: self.terminal(&next),
            state: next,
            reward: RewardVector::from_slice(&[r]),
        }
    }

    fn rollout_action(&self, _s: &ToyState, rng: &mut ChaCha8Rng) -> usize {
        rng.gen_range(0..self.actions)
    }
}

struct Child {
    node: usize,
    visits: u64,
    q: f64,
    reward: f64,
}

struct Node {
    state: ToyState,
    terminal: bool,
    visits: u64,
    children: Vec<Child>,
    lo: f64,
    hi: f64,
}

/// Plain scalar UCT with the same conventions as the library search:
/// nodes start with one visit, children are expanded in index order, means
/// are rescaled by the node's return range, ties are broken with the
/// search generator (drawn only when there is a tie) and the final choice
/// is the best mean.
pub fn scalar_uct(tree: &ToyTree, iterations: usize, c: f64, gamma: f64, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let new_node = |state: ToyState, terminal: bool| Node {
        state,
        terminal,
        visits: 1,
        children: Vec::new(),
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };
    let mut nodes = vec![new_node(tree.root(), false)];
    let argmax = |vals: &[f64], rng: &mut ChaCha8Rng| -> usize {
        let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] == m).collect();
        if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.gen_range(0..ties.len())]
        }
    };
    for _ in 0..iterations {
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut cur = 0;
        let leaf = loop {
            if nodes[cur].terminal {
                break 0.0;
            }
            if nodes[cur].children.len() < tree.actions {
                let a = nodes[cur].children.len();
                let (next, r) = tree.transition(&nodes[cur].state, a);
                let term = tree.terminal(&next);
                let mut value = 0.0;
                if !term {
                    let mut s = next;
                    let mut w = 1.0;
                    while !tree.terminal(&s) {
                        let act = rng.gen_range(0..tree.actions);
                        let (n2, r2) = tree.transition(&s, act);
                        value += w * r2;
                        w *= gamma;
                        s = n2;
                    }
                }
                nodes.push(new_node(next, term));
                let idx = nodes.len() - 1;
                nodes[cur].children.push(Child {
                    node: idx,
                    visits: 0,
                    q: 0.0,
                    reward: r,
                });
                path.push((cur, a));
                break value;
            }
            let n = &nodes[cur];
            let ln_n = (n.visits as f64).ln();
            let vals: Vec<f64> = n
                .children
                .iter()
                .map(|ch| {
                    if ch.visits == 0 {
                        f64::INFINITY
                    } else {
                        let norm = if n.hi > n.lo {
                            (ch.q - n.lo) / (n.hi - n.lo)
                        } else {
                            0.5
                        };
                        norm + c * (ln_n / ch.visits as f64).sqrt()
                    }
                })
                .collect();
            let a = argmax(&vals, &mut rng);
            path.push((cur, a));
            cur = nodes[cur].children[a].node;
        };
        let mut g = leaf;
        for &(n, a) in path.iter().rev() {
            let node = &mut nodes[n];
            let ch = &mut node.children[a];
            g = ch.reward + gamma * g;
            ch.visits += 1;
            ch.q += (g - ch.q) / ch.visits as f64;
            node.lo = node.lo.min(g);
            node.hi = node.hi.max(g);
            node.visits += 1;
        }
    }
    let root = &nodes[0];
    let visited: Vec<usize> = (0..root.children.len())
        .filter(|&a| root.children[a].visits > 0)
        .collect();
    let qs: Vec<f64> = visited.iter().map(|&a| root.children[a].q).collect();
    visited[argmax(&qs, &mut rng)]
}
