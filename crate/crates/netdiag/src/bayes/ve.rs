//! Factor machinery for exact variable elimination over binary variables.
//!
//! Noisy-OR vertices with many parents never get tabulated directly: a
//! vertex with more than two parents is decomposed into per-parent
//! inhibition pass-through variables and a pairwise OR cascade, so every
//! factor stays at three variables or fewer. The decomposition is exact
//! and the auxiliary variables are always summed out, so posteriors over
//! the original vertices are unchanged.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::BayesError;

use super::{BayesianNetwork, VertexState};

/// A potential over a sorted set of binary variables. Entry index packs
/// the variable states little-endian: bit k is the state of `vars[k]`,
/// 1 = down.
#[derive(Debug, Clone)]
pub(crate) struct Factor {
    pub vars: Vec<usize>,
    pub table: Vec<f64>,
}

impl Factor {
    fn constant(value: f64) -> Factor {
        Factor {
            vars: Vec::new(),
            table: vec![value],
        }
    }

    fn unary(var: usize, up: f64, down: f64) -> Factor {
        Factor {
            vars: vec![var],
            table: vec![up, down],
        }
    }

    /// Fixes one variable to a state, dropping it from the scope.
    fn restrict(&self, var: usize, state: VertexState) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let bit = 1usize << pos;
        let value = match state {
            VertexState::Up => 0,
            VertexState::Down => bit,
        };
        let vars: Vec<usize> = self
            .vars
            .iter()
            .copied()
            .filter(|&v| v != var)
            .collect();
        let mut table = vec![0.0; 1 << vars.len()];
        for (new_idx, slot) in table.iter_mut().enumerate() {
            // re-insert the fixed bit at position pos
            let low = new_idx & (bit - 1);
            let high = (new_idx & !(bit - 1)) << 1;
            *slot = self.table[high | value | low];
        }
        Factor { vars, table }
    }

    fn multiply(&self, other: &Factor) -> Factor {
        let vars: Vec<usize> = {
            let mut set: BTreeSet<usize> = self.vars.iter().copied().collect();
            set.extend(other.vars.iter().copied());
            set.into_iter().collect()
        };
        let pos_a: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.binary_search(v).expect("var present"))
            .collect();
        let pos_b: Vec<usize> = other
            .vars
            .iter()
            .map(|v| vars.binary_search(v).expect("var present"))
            .collect();
        let mut table = vec![0.0; 1 << vars.len()];
        for (idx, slot) in table.iter_mut().enumerate() {
            let mut ia = 0usize;
            for (k, &p) in pos_a.iter().enumerate() {
                ia |= ((idx >> p) & 1) << k;
            }
            let mut ib = 0usize;
            for (k, &p) in pos_b.iter().enumerate() {
                ib |= ((idx >> p) & 1) << k;
            }
            *slot = self.table[ia] * other.table[ib];
        }
        Factor { vars, table }
    }

    fn sum_out(&self, var: usize) -> Factor {
        let pos = self
            .vars
            .iter()
            .position(|&v| v == var)
            .expect("sum_out of a var in scope");
        let bit = 1usize << pos;
        let vars: Vec<usize> = self
            .vars
            .iter()
            .copied()
            .filter(|&v| v != var)
            .collect();
        let mut table = vec![0.0; 1 << vars.len()];
        for (new_idx, slot) in table.iter_mut().enumerate() {
            let low = new_idx & (bit - 1);
            let high = (new_idx & !(bit - 1)) << 1;
            *slot = self.table[high | low] + self.table[high | bit | low];
        }
        Factor { vars, table }
    }
}

/// The network compiled to decomposed factors, one per variable.
/// Variables `0..n_original` mirror the graph vertices; the rest are
/// decomposition auxiliaries.
#[derive(Debug, Clone)]
pub(crate) struct CompiledModel {
    pub n_vars: usize,
    /// CPT factor of each variable, indexed by variable.
    pub factors: Vec<Factor>,
    /// Parents of each variable in the decomposed DAG.
    pub parents: Vec<Vec<usize>>,
}

impl CompiledModel {
    pub fn compile(bn: &BayesianNetwork) -> CompiledModel {
        let n = bn.graph.vertex_count();
        let mut model = CompiledModel {
            n_vars: n,
            factors: Vec::with_capacity(n),
            parents: vec![Vec::new(); n],
        };
        // Two passes: original vertices first so variable ids line up with
        // graph indices, auxiliaries appended afterwards.
        let mut pending: Vec<(usize, Vec<usize>, Vec<f64>, f64)> = Vec::new();
        for v in 0..n {
            model.factors.push(Factor::constant(1.0)); // placeholder
            model.parents[v] = bn.parents[v].clone();
            pending.push((
                v,
                bn.parents[v].clone(),
                bn.cpts[v].inhibitions.clone(),
                bn.cpts[v].leak,
            ));
        }
        for (v, parents, inhibitions, leak) in pending {
            let factor = model.child_factor(v, &parents, &inhibitions, leak);
            model.factors[v] = factor;
        }
        model
    }

    fn new_var(&mut self, parents: Vec<usize>, factor: Factor) -> usize {
        let id = self.n_vars;
        self.n_vars += 1;
        self.parents.push(parents);
        self.factors.push(factor);
        id
    }

    /// Tabulates a noisy-OR CPT for `child`, decomposing when it has more
    /// than two parents.
    fn child_factor(
        &mut self,
        child: usize,
        parents: &[usize],
        inhibitions: &[f64],
        leak: f64,
    ) -> Factor {
        if parents.len() <= 2 {
            return noisy_or_factor(child, parents, inhibitions, leak);
        }
        // Pass-through variable per inhibited parent; raw parent otherwise.
        let mut inputs = Vec::with_capacity(parents.len());
        for (&p, &q) in parents.iter().zip(inhibitions) {
            if q == 0.0 {
                inputs.push(p);
            } else {
                let factor_placeholder = Factor::constant(1.0);
                let aux = self.new_var(vec![p], factor_placeholder);
                // P(aux down | p down) = 1 - q, P(aux down | p up) = 0
                self.factors[aux] = noisy_or_factor(aux, &[p], &[q], 0.0);
                inputs.push(aux);
            }
        }
        // Left-fold OR cascade; the final node carries the leak. The
        // child's recorded parent is the cascade root so ancestral pruning
        // follows the factors actually emitted.
        let mut acc = inputs[0];
        for &next in &inputs[1..] {
            let placeholder = Factor::constant(1.0);
            let aux = self.new_var(vec![acc, next], placeholder);
            self.factors[aux] = noisy_or_factor(aux, &[acc, next], &[0.0, 0.0], 0.0);
            acc = aux;
        }
        self.parents[child] = vec![acc];
        noisy_or_factor(child, &[acc], &[0.0], leak)
    }

    /// Adds a deterministic-OR variable over `members` and returns its id.
    /// Used for element-level disjunction queries.
    pub fn add_disjunction(&mut self, members: &[usize]) -> usize {
        assert!(!members.is_empty());
        if members.len() == 1 {
            return members[0];
        }
        let mut acc = members[0];
        for &next in &members[1..] {
            let placeholder = Factor::constant(1.0);
            let aux = self.new_var(vec![acc, next], placeholder);
            self.factors[aux] = noisy_or_factor(aux, &[acc, next], &[0.0, 0.0], 0.0);
            acc = aux;
        }
        acc
    }

    /// Ancestors of the given variables (inclusive) in the decomposed DAG.
    fn ancestral_closure(&self, seeds: impl Iterator<Item = usize>) -> Vec<bool> {
        let mut in_set = vec![false; self.n_vars];
        let mut stack: Vec<usize> = seeds.collect();
        while let Some(v) = stack.pop() {
            if in_set[v] {
                continue;
            }
            in_set[v] = true;
            stack.extend(self.parents[v].iter().copied());
        }
        in_set
    }
}

/// Direct tabulation of a noisy-OR CPT over (child, parents).
fn noisy_or_factor(child: usize, parents: &[usize], inhibitions: &[f64], leak: f64) -> Factor {
    let mut scope: Vec<usize> = parents.to_vec();
    scope.push(child);
    scope.sort_unstable();
    let child_pos = scope.binary_search(&child).expect("child in scope");
    let parent_pos: Vec<usize> = parents
        .iter()
        .map(|p| scope.binary_search(p).expect("parent in scope"))
        .collect();
    let mut table = vec![0.0; 1 << scope.len()];
    for (idx, slot) in table.iter_mut().enumerate() {
        let mut up = 1.0 - leak;
        for (k, &pos) in parent_pos.iter().enumerate() {
            if (idx >> pos) & 1 == 1 {
                up *= inhibitions[k];
            }
        }
        let down = 1.0 - up;
        *slot = if (idx >> child_pos) & 1 == 1 { down } else { up };
    }
    Factor {
        vars: scope,
        table,
    }
}

/// Repeated-query inference over one evidence set: evidence is folded into
/// the factor tables once, then each [`Eliminator::marginal`] call prunes
/// to the ancestral closure of query-plus-evidence and eliminates
/// everything but the query, variables picked by min-degree.
pub(crate) struct Eliminator<'a> {
    model: &'a CompiledModel,
    hard: &'a BTreeMap<usize, VertexState>,
    /// Evidence-applied factors; index i is variable i's CPT, soft
    /// likelihood factors follow.
    base_factors: Vec<Factor>,
    /// Which base factors to keep for a given closure: the owning variable
    /// of each factor (CPT factors own their child, soft factors their var).
    factor_owner: Vec<usize>,
    evidence_vars: Vec<usize>,
}

impl<'a> Eliminator<'a> {
    pub fn new(
        model: &'a CompiledModel,
        hard: &'a BTreeMap<usize, VertexState>,
        soft: &'a BTreeMap<usize, (f64, f64)>,
    ) -> Eliminator<'a> {
        let mut base_factors = Vec::with_capacity(model.n_vars + soft.len());
        let mut factor_owner = Vec::with_capacity(model.n_vars + soft.len());
        for v in 0..model.n_vars {
            base_factors.push(model.factors[v].clone());
            factor_owner.push(v);
        }
        for (&v, &(lambda_up, lambda_down)) in soft {
            base_factors.push(Factor::unary(v, lambda_up, lambda_down));
            factor_owner.push(v);
        }
        for (&v, &state) in hard {
            for f in &mut base_factors {
                if f.vars.contains(&v) {
                    *f = f.restrict(v, state);
                }
            }
        }
        let evidence_vars = hard.keys().chain(soft.keys()).copied().collect();
        Eliminator {
            model,
            hard,
            base_factors,
            factor_owner,
            evidence_vars,
        }
    }

    pub fn marginal(&self, query: usize) -> Result<f64, BayesError> {
        if let Some(&state) = self.hard.get(&query) {
            return Ok(match state {
                VertexState::Up => 0.0,
                VertexState::Down => 1.0,
            });
        }
        let relevant = self.model.ancestral_closure(
            std::iter::once(query).chain(self.evidence_vars.iter().copied()),
        );
        let mut factors: Vec<Factor> = self
            .base_factors
            .iter()
            .zip(&self.factor_owner)
            .filter(|(_, &owner)| relevant[owner])
            .map(|(f, _)| f.clone())
            .collect();

        // Interaction graph for min-degree selection, updated as cliques
        // form during elimination.
        let mut adjacency: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for f in &factors {
            for &v in &f.vars {
                let entry = adjacency.entry(v).or_default();
                entry.extend(f.vars.iter().copied().filter(|&u| u != v));
            }
        }
        adjacency.entry(query).or_default();

        while adjacency.len() > 1 {
            let victim = adjacency
                .iter()
                .filter(|(&v, _)| v != query)
                .map(|(&v, n)| (n.len(), v))
                .min()
                .map(|(_, v)| v)
                .expect("non-query var remains");
            let neighbors = adjacency.remove(&victim).expect("victim in adjacency");
            for &n in &neighbors {
                if let Some(set) = adjacency.get_mut(&n) {
                    set.remove(&victim);
                    set.extend(neighbors.iter().copied().filter(|&u| u != n));
                }
            }

            let (touching, rest): (Vec<Factor>, Vec<Factor>) =
                factors.into_iter().partition(|f| f.vars.contains(&victim));
            factors = rest;
            let mut product = touching
                .into_iter()
                .reduce(|a, b| a.multiply(&b))
                .expect("victim var appears in at least one factor");
            product = product.sum_out(victim);
            factors.push(product);
        }

        let combined = factors
            .into_iter()
            .reduce(|a, b| a.multiply(&b))
            .unwrap_or_else(|| Factor::constant(1.0));
        let (w_up, w_down) = match combined.vars.as_slice() {
            [] => (combined.table[0], combined.table[0]),
            [v] if *v == query => (combined.table[0], combined.table[1]),
            other => unreachable!("leftover scope {other:?}"),
        };
        let z = w_up + w_down;
        if z <= 0.0 {
            return Err(BayesError::Contradiction {
                assignment: summarize_evidence(self.hard),
            });
        }
        Ok(w_down / z)
    }
}

fn summarize_evidence(hard: &BTreeMap<usize, VertexState>) -> String {
    hard.iter()
        .map(|(v, s)| format!("v{v}={s:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}
