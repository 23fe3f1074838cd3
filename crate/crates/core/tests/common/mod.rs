//! Random action sets and brute-force reference answers for tests.
#![allow(dead_code)]

use num_rational::Rational64;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use reachset::actionset::{ActionSetSpec, ConstraintSpec, FeatureSpec, Sign, ThermometerDirection, ValueType};

pub const CONSTRAINT_KINDS: [&str; 5] = ["one_hot", "thermometer", "linkage", "if_then", "reachability"];

/// A random spec plus some points in its domain.
pub struct Instance {
    pub seed: u64,
    pub spec: ActionSetSpec,
    pub points: Vec<Vec<i64>>,
}

/// Every point in the bounds box of the spec, in lexicographic order.
pub fn grid(spec: &ActionSetSpec) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for f in spec.features() {
        let mut next = Vec::with_capacity(out.len() * (f.upper_bound - f.lower_bound + 1) as usize);
        for prefix in &out {
            for v in f.lower_bound..=f.upper_bound {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// The reachable set by definition: every box point whose difference from
/// `x` is an admissible action.
pub fn brute_force_reachable(spec: &ActionSetSpec, x: &[i64]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = grid(spec)
        .into_iter()
        .filter(|y| {
            let a: Vec<i64> = y.iter().zip(x).map(|(u, v)| u - v).collect();
            spec.check_action(x, &a).unwrap()
        })
        .collect();
    out.sort();
    out
}

fn random_sign(rng: &mut StdRng) -> Sign {
    *[Sign::Free, Sign::NonNegative, Sign::NonPositive].choose(rng).unwrap()
}

fn random_scale(rng: &mut StdRng) -> Rational64 {
    *[
        Rational64::from_integer(1),
        Rational64::from_integer(-1),
        Rational64::from_integer(2),
        Rational64::new(1, 2),
        Rational64::new(-3, 2),
    ]
    .choose(rng)
    .unwrap()
}

fn name(j: usize) -> String {
    format!("f{j}")
}

/// Draws one constraint of the given kind over fresh features where the
/// kind needs its own features. Returns `None` when the features at hand
/// cannot host it.
fn draw_constraint(
    rng: &mut StdRng,
    kind: &str,
    features: &[FeatureSpec],
    claimed: &mut [bool],
) -> Option<ConstraintSpec> {
    let d = features.len();
    let free: Vec<usize> = (0..d).filter(|&j| !claimed[j]).collect();
    let free_binary: Vec<usize> = free
        .iter()
        .copied()
        .filter(|&j| features[j].value_type == ValueType::Binary)
        .collect();
    match kind {
        "one_hot" | "thermometer" => {
            if free_binary.len() < 2 {
                return None;
            }
            let k = rng.gen_range(2..=free_binary.len().min(4));
            let mut chosen: Vec<usize> = free_binary.choose_multiple(rng, k).copied().collect();
            chosen.sort();
            for &j in &chosen {
                claimed[j] = true;
            }
            let names: Vec<String> = chosen.iter().map(|&j| name(j)).collect();
            if kind == "one_hot" {
                let max_on = rng.gen_range(1..=k.min(2)) as i64;
                let min_on = rng.gen_range(0..=max_on);
                Some(ConstraintSpec::OneHotEncoding {
                    features: names,
                    min_on,
                    max_on,
                })
            } else {
                let direction = if rng.gen_bool(0.5) {
                    ThermometerDirection::Increase
                } else {
                    ThermometerDirection::Decrease
                };
                Some(ConstraintSpec::ThermometerEncoding {
                    features: names,
                    direction,
                })
            }
        }
        "linkage" => {
            let sources: Vec<usize> = (0..d).filter(|&j| features[j].actionable).collect();
            let &source = sources.choose(rng)?;
            let others: Vec<usize> = free.iter().copied().filter(|&j| j != source).collect();
            if others.is_empty() {
                return None;
            }
            let k = rng.gen_range(1..=others.len().min(2));
            let targets = others
                .choose_multiple(rng, k)
                .map(|&t| (name(t), random_scale(rng)))
                .collect();
            Some(ConstraintSpec::DirectionalLinkage {
                source: name(source),
                targets,
            })
        }
        "if_then" => {
            if free.len() < 2 {
                return None;
            }
            let pair: Vec<usize> = free.choose_multiple(rng, 2).copied().collect();
            let (a, c) = (pair[0], pair[1]);
            let fa = &features[a];
            let fc = &features[c];
            claimed[c] = true;
            Some(ConstraintSpec::IfThen {
                antecedent: name(a),
                threshold: rng.gen_range(fa.lower_bound..=fa.upper_bound),
                consequent: name(c),
                forced_value: rng.gen_range(fc.lower_bound..=fc.upper_bound),
            })
        }
        "reachability" => {
            if free.is_empty() {
                return None;
            }
            let k = rng.gen_range(1..=free.len().min(2));
            let mut chosen: Vec<usize> = free.choose_multiple(rng, k).copied().collect();
            chosen.sort();
            for &j in &chosen {
                claimed[j] = true;
            }
            let mut block_grid = vec![Vec::new()];
            for &j in &chosen {
                let f = &features[j];
                block_grid = block_grid
                    .into_iter()
                    .flat_map(|p: Vec<i64>| {
                        (f.lower_bound..=f.upper_bound).map(move |v| {
                            let mut q = p.clone();
                            q.push(v);
                            q
                        })
                    })
                    .collect();
            }
            let n = rng.gen_range(1..=block_grid.len());
            let values: Vec<Vec<i64>> = block_grid.choose_multiple(rng, n).cloned().collect();
            let edges = (0..n)
                .map(|i| (0..n).map(|j| i == j || rng.gen_bool(0.4)).collect())
                .collect();
            Some(ConstraintSpec::ReachabilityMatrix {
                features: chosen.iter().map(|&j| name(j)).collect(),
                values,
                edges,
            })
        }
        _ => unreachable!(),
    }
}

/// A random spec whose actionable part is at most `max_bits` binary
/// equivalents, with up to three constraints of uniformly drawn kinds, and
/// up to `n_points` distinct in-domain points.
pub fn random_instance(seed: u64, max_bits: f64, n_points: usize) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    loop {
        let d = rng.gen_range(2..=7);
        let features: Vec<FeatureSpec> = (0..d)
            .map(|j| {
                let actionable = rng.gen_bool(0.75);
                let sign = random_sign(&mut rng);
                if rng.gen_bool(0.6) {
                    let mut f = FeatureSpec::binary(name(j), actionable, sign);
                    if !actionable {
                        f.sign = Sign::Free;
                    }
                    f
                } else {
                    let lb = rng.gen_range(-2..=1);
                    let ub = lb + rng.gen_range(1..=3);
                    FeatureSpec::integer(name(j), lb, ub, actionable, if actionable { sign } else { Sign::Free })
                }
            })
            .collect();
        let mut claimed = vec![false; d];
        let mut constraints = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let kind = CONSTRAINT_KINDS.choose(&mut rng).unwrap();
            if let Some(c) = draw_constraint(&mut rng, kind, &features, &mut claimed) {
                constraints.push(c);
            }
        }
        let Ok(spec) = ActionSetSpec::new(features, constraints) else {
            continue;
        };
        if spec.binary_equivalent_size() > max_bits {
            continue;
        }
        let mut inside: Vec<Vec<i64>> = grid(&spec).into_iter().filter(|p| spec.contains_point(p)).collect();
        if inside.is_empty() {
            continue;
        }
        inside.shuffle(&mut rng);
        inside.truncate(n_points);
        return Instance {
            seed,
            spec,
            points: inside,
        };
    }
}

/// Kinds of the constraints in a spec.
pub fn kinds(spec: &ActionSetSpec) -> Vec<&'static str> {
    spec.constraints().iter().map(|c| c.kind()).collect()
}
