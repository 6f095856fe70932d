//! Seeded random behaviours for fuzzing and property tests.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::name::ActionName;
use super::raw::RawBehaviour;
use super::term::{validate, SessionBehaviour};

/// The first `size` action names: `a`, `b`, ... and `a26`, `a27`, ... beyond `z`.
pub fn alphabet(size: usize) -> Vec<ActionName> {
    (0..size.max(1))
        .map(|i| {
            let s = if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("a{i}")
            };
            ActionName::new(&s).expect("generated name is valid")
        })
        .collect()
}

pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A closed, guarded behaviour of nesting depth at most `max_depth`.
    /// Depth 1 yields `1` or a single prefix.
    pub fn behaviour(&mut self, max_depth: usize, alphabet_size: usize) -> SessionBehaviour {
        let names = alphabet(alphabet_size);
        let raw = self.raw(max_depth.max(1), &names, &mut Vec::new(), true);
        validate(&raw).expect("generator produces valid behaviours")
    }

    fn branch_count(&mut self, available: usize) -> usize {
        let roll = self.rng.random_range(0..10);
        let k = match roll {
            0..=5 => 1,
            6..=8 => 2,
            _ => 3,
        };
        k.min(available)
    }

    fn raw(
        &mut self,
        depth: usize,
        names: &[ActionName],
        binders: &mut Vec<String>,
        top: bool,
    ) -> RawBehaviour {
        let roll = self.rng.random_range(0..10);
        if roll == 0 {
            return RawBehaviour::Done;
        }
        if depth >= 2 && roll <= 2 {
            let x = format!("x{}", binders.len());
            binders.push(x.clone());
            let body = self.raw(depth - 1, names, binders, false);
            binders.pop();
            return RawBehaviour::rec(x, body);
        }
        let k = if depth == 1 && top { 1 } else { self.branch_count(names.len()) };
        let picked = sample(&mut self.rng, names.len(), k);
        let mut branches: Vec<(ActionName, RawBehaviour)> = picked
            .into_iter()
            .map(|i| (names[i].clone(), RawBehaviour::Done))
            .collect();
        for (_, cont) in branches.iter_mut() {
            *cont = self.continuation(depth - 1, names, binders);
        }
        if self.rng.random_bool(0.5) {
            RawBehaviour::Ext(branches)
        } else {
            RawBehaviour::Int(branches)
        }
    }

    fn continuation(
        &mut self,
        depth: usize,
        names: &[ActionName],
        binders: &mut Vec<String>,
    ) -> RawBehaviour {
        if !binders.is_empty() && (depth == 0 || self.rng.random_bool(0.3)) {
            if depth == 0 && self.rng.random_bool(0.3) {
                return RawBehaviour::Done;
            }
            let i = self.rng.random_range(0..binders.len());
            return RawBehaviour::Var(binders[i].clone());
        }
        if depth == 0 {
            RawBehaviour::Done
        } else {
            self.raw(depth, names, binders, false)
        }
    }

    /// A random variation of `t`: output prefixes inserted, external branches
    /// added, internal branches added or removed.
    pub fn perturb(&mut self, t: &SessionBehaviour, alphabet_size: usize) -> SessionBehaviour {
        let names = alphabet(alphabet_size);
        let raw = t.to_raw();
        for _ in 0..8 {
            let mutated = self.mutate(&raw, &names, 0.25);
            if let Ok(v) = validate(&mutated) {
                return v;
            }
        }
        t.clone()
    }

    fn mutate(&mut self, raw: &RawBehaviour, names: &[ActionName], p: f64) -> RawBehaviour {
        let inner = match raw {
            RawBehaviour::Done | RawBehaviour::Var(_) => raw.clone(),
            RawBehaviour::Rec(x, body) => RawBehaviour::Rec(x.clone(), Box::new(self.mutate(body, names, p))),
            RawBehaviour::Ext(bs) | RawBehaviour::Int(bs) => {
                let output = matches!(raw, RawBehaviour::Int(_));
                let mut bs: Vec<_> = bs.iter().map(|(n, c)| (n.clone(), self.mutate(c, names, p))).collect();
                if self.rng.random_bool(p) {
                    let fresh: Vec<_> = names.iter().filter(|n| bs.iter().all(|(m, _)| m != *n)).collect();
                    if !fresh.is_empty() {
                        let n = fresh[self.rng.random_range(0..fresh.len())].clone();
                        bs.push((n, RawBehaviour::Done));
                    }
                } else if output && bs.len() > 1 && self.rng.random_bool(p) {
                    let i = self.rng.random_range(0..bs.len());
                    bs.remove(i);
                }
                if output {
                    RawBehaviour::Int(bs)
                } else {
                    RawBehaviour::Ext(bs)
                }
            }
        };
        // A prefix in front of a rec body would leave it unguarded only if the
        // body were a variable, which never happens here.
        if !matches!(inner, RawBehaviour::Var(_)) && self.rng.random_bool(p / 2.0) {
            let n = names[self.rng.random_range(0..names.len())].clone();
            RawBehaviour::output(n, inner)
        } else {
            inner
        }
    }

    /// A client/server pair drawn from a mix of independent pairs and pairs
    /// built around a dual, so that both verdicts are well represented.
    pub fn pair(&mut self, max_depth: usize, alphabet_size: usize) -> (SessionBehaviour, SessionBehaviour) {
        match self.rng.random_range(0..3) {
            0 => (
                self.behaviour(max_depth, alphabet_size),
                self.behaviour(max_depth, alphabet_size),
            ),
            1 => {
                let rho = self.behaviour(max_depth, alphabet_size);
                let server = self.perturb(&rho.dual(), alphabet_size);
                (rho, server)
            }
            _ => {
                let sigma = self.behaviour(max_depth, alphabet_size);
                let client = self.perturb(&sigma.dual(), alphabet_size);
                (client, sigma)
            }
        }
    }
}

/// Deterministic in `seed`.
pub fn gen_random(seed: u64, max_depth: usize, alphabet_size: usize) -> SessionBehaviour {
    Generator::new(seed).behaviour(max_depth, alphabet_size)
}
