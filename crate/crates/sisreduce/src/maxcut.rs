//! Max-cut instances, the equivalent zero-one quadratic programme, and
//! brute-force oracles over all binary assignments.

use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_index, AdjacencyMatrix};
use std::fmt;

/// Default cap on brute-force enumeration.
pub const BRUTEFORCE_LIMIT: usize = 20;

/// A two-colouring of the nodes; `y_i = 1` places node `i` in the cut set.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct CutAssignment {
    n: usize,
    bits: u64,
}

impl CutAssignment {
    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!(n >= 1 && n <= 64);
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self { n, bits: bits & mask }
    }

    pub fn from_bools(values: &[bool]) -> Self {
        let mut bits = 0u64;
        for (i, &v) in values.iter().enumerate() {
            if v {
                bits |= 1 << i;
            }
        }
        Self::from_bits(values.len(), bits)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.bits & (1 << i) != 0
    }

    /// ASCII '0'/'1'; the leftmost character is node 0.
    pub fn to_bitstring(&self) -> String {
        (0..self.n).map(|i| if self.is_set(i) { '1' } else { '0' }).collect()
    }

    /// Key that orders assignments lexicographically by (y_0, y_1, ...).
    pub fn lex_key(&self) -> u64 {
        self.bits.reverse_bits() >> (64 - self.n)
    }
}

impl fmt::Debug for CutAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bitstring())
    }
}

fn check_len(n: usize, got: usize) -> Result<()> {
    if n != got {
        Err(Error::LengthMismatch { expected: n, got })
    } else {
        Ok(())
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > BRUTEFORCE_LIMIT {
        Err(Error::TooLarge(format!("n = {n} exceeds brute-force limit {BRUTEFORCE_LIMIT}")))
    } else {
        Ok(())
    }
}

/// Number of links crossing the bipartition.
pub fn cut_size(g: &AdjacencyMatrix, y: &CutAssignment) -> Result<u64> {
    check_len(g.n(), y.n())?;
    let mut total = 0u64;
    for (i, j) in g.links() {
        if y.is_set(i) != y.is_set(j) {
            total += 1;
        }
    }
    Ok(total)
}

/// Exhaustive maximum cut: value, the lexicographically smallest optimal
/// assignment, and the number of optimal assignments.
pub fn maxcut_bruteforce(g: &AdjacencyMatrix) -> Result<(u64, CutAssignment, u64)> {
    check_size(g.n())?;
    let n = g.n();
    let mut best = 0u64;
    let mut best_y = CutAssignment::from_bits(n, 0);
    let mut count = 0u64;
    for bits in 0..(1u64 << n) {
        let y = CutAssignment::from_bits(n, bits);
        let v = cut_size(g, &y)?;
        if v > best || bits == 0 {
            best = v;
            best_y = y;
            count = 1;
        } else if v == best {
            count += 1;
            if y.lex_key() < best_y.lex_key() {
                best_y = y;
            }
        }
    }
    Ok((best, best_y, count))
}

/// Decision form: is there a cut of size at least `kappa`?
pub fn maxcut_decision(g: &AdjacencyMatrix, kappa: u64) -> Result<bool> {
    Ok(maxcut_bruteforce(g)?.0 >= kappa)
}

/// Quadratic pseudo-Boolean objective over binary variables:
/// `sum_{i<j} b_ij y_i y_j + sum_l b_l y_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct UqpInstance {
    n: usize,
    quad: Vec<f64>,
    lin: Vec<f64>,
}

impl UqpInstance {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1 && n <= 64);
        Self { n, quad: vec![0.0; pair_count(n)], lin: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn quad_coeff(&self, i: usize, j: usize) -> f64 {
        self.quad[pair_index(self.n, i.min(j), i.max(j))]
    }

    pub fn set_quad_coeff(&mut self, i: usize, j: usize, v: f64) {
        self.quad[pair_index(self.n, i.min(j), i.max(j))] = v;
    }

    pub fn lin_coeff(&self, l: usize) -> f64 {
        self.lin[l]
    }

    pub fn set_lin_coeff(&mut self, l: usize, v: f64) {
        self.lin[l] = v;
    }
}

/// Encodes a graph's max-cut problem: `b_ij = -2 a_ij`, `b_l = degree(l)`.
pub fn uqp_from_graph(g: &AdjacencyMatrix) -> UqpInstance {
    let mut inst = UqpInstance::new(g.n());
    for (i, j) in g.links() {
        inst.set_quad_coeff(i, j, -2.0);
    }
    for l in 0..g.n() {
        inst.set_lin_coeff(l, g.degree(l) as f64);
    }
    inst
}

/// Evaluates the objective; summation runs over pairs in index order, then
/// over the linear terms.
pub fn uqp_objective(inst: &UqpInstance, y: &CutAssignment) -> Result<f64> {
    check_len(inst.n, y.n())?;
    let mut total = 0.0;
    for i in 0..inst.n {
        if !y.is_set(i) {
            continue;
        }
        for j in (i + 1)..inst.n {
            if y.is_set(j) {
                total += inst.quad[pair_index(inst.n, i, j)];
            }
        }
    }
    for l in 0..inst.n {
        if y.is_set(l) {
            total += inst.lin[l];
        }
    }
    Ok(total)
}

/// Exhaustive maximum of the objective together with the full set of optimal
/// assignments, in ascending bit order.
pub fn uqp_bruteforce(inst: &UqpInstance) -> Result<(f64, Vec<CutAssignment>)> {
    check_size(inst.n)?;
    let mut best = f64::NEG_INFINITY;
    let mut opt = Vec::new();
    for bits in 0..(1u64 << inst.n) {
        let y = CutAssignment::from_bits(inst.n, bits);
        let v = uqp_objective(inst, &y)?;
        if v > best {
            best = v;
            opt.clear();
            opt.push(y);
        } else if v == best {
            opt.push(y);
        }
    }
    Ok((best, opt))
}

/// Gap between the optimal objective value and the next largest attained
/// value.
pub fn optimality_gap(inst: &UqpInstance) -> Result<f64> {
    check_size(inst.n)?;
    let mut best = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for bits in 0..(1u64 << inst.n) {
        let y = CutAssignment::from_bits(inst.n, bits);
        let v = uqp_objective(inst, &y)?;
        if v > best {
            second = best;
            best = v;
        } else if v < best && v > second {
            second = v;
        }
    }
    if second == f64::NEG_INFINITY {
        return Err(Error::AllOptimal);
    }
    Ok(best - second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::connected_graphs;

    fn k3() -> AdjacencyMatrix {
        AdjacencyMatrix::from_links(3, &[(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    fn c4() -> AdjacencyMatrix {
        AdjacencyMatrix::from_links(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap()
    }

    /// Independent form of the cut objective, evaluated straight from the
    /// definition `sum a_ij (y_i(1-y_j) + y_j(1-y_i))`.
    fn cut_objective_oracle(g: &AdjacencyMatrix, y: &CutAssignment) -> f64 {
        let mut total = 0.0;
        for i in 0..g.n() {
            for j in (i + 1)..g.n() {
                if g.has_link(i, j) {
                    let yi = f64::from(u8::from(y.is_set(i)));
                    let yj = f64::from(u8::from(y.is_set(j)));
                    total += yi * (1.0 - yj) + yj * (1.0 - yi);
                }
            }
        }
        total
    }

    #[test]
    fn cut_size_examples() {
        let y = CutAssignment::from_bools(&[true, false, false]);
        assert_eq!(cut_size(&k3(), &y).unwrap(), 2);
        let zeros = CutAssignment::from_bits(4, 0);
        assert_eq!(cut_size(&c4(), &zeros).unwrap(), 0);
        let alt = CutAssignment::from_bools(&[true, false, true, false]);
        assert_eq!(cut_size(&c4(), &alt).unwrap(), 4);
    }

    #[test]
    fn maxcut_values_small_complete_graphs() {
        assert_eq!(maxcut_bruteforce(&k3()).unwrap().0, 2);
        assert_eq!(maxcut_bruteforce(&c4()).unwrap().0, 4);
        let k4 = crate::graph::from_upper_bits(4, 0b111111);
        assert_eq!(maxcut_bruteforce(&k4).unwrap().0, 4);
    }

    #[test]
    fn maxcut_decision_thresholds() {
        assert!(maxcut_decision(&k3(), 2).unwrap());
        assert!(!maxcut_decision(&k3(), 3).unwrap());
        assert!(maxcut_decision(&AdjacencyMatrix::empty(3), 0).unwrap());
    }

    #[test]
    fn from_graph_coefficients() {
        let k2 = AdjacencyMatrix::from_links(2, &[(0, 1)]).unwrap();
        let inst = uqp_from_graph(&k2);
        assert_eq!(inst.quad_coeff(0, 1), -2.0);
        assert_eq!(inst.lin_coeff(0), 1.0);
        assert_eq!(inst.lin_coeff(1), 1.0);

        let empty = uqp_from_graph(&AdjacencyMatrix::empty(3));
        assert!(empty.quad.iter().chain(empty.lin.iter()).all(|&c| c == 0.0));

        let t = uqp_from_graph(&k3());
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(t.quad_coeff(i, j), -2.0);
        }
        for l in 0..3 {
            assert_eq!(t.lin_coeff(l), 2.0);
        }
    }

    #[test]
    fn objective_matches_cut_size_and_examples() {
        let inst = uqp_from_graph(&k3());
        let y = CutAssignment::from_bools(&[true, false, false]);
        assert_eq!(uqp_objective(&inst, &y).unwrap(), 2.0);
        assert_eq!(uqp_objective(&inst, &CutAssignment::from_bits(3, 0)).unwrap(), 0.0);

        let k2 = AdjacencyMatrix::from_links(2, &[(0, 1)]).unwrap();
        let both = CutAssignment::from_bools(&[true, true]);
        assert_eq!(uqp_objective(&uqp_from_graph(&k2), &both).unwrap(), 0.0);
    }

    #[test]
    fn objective_equals_definition_oracle_exhaustively() {
        for n in 2..=5 {
            for g in crate::graph::all_graphs(n) {
                let inst = uqp_from_graph(&g);
                for bits in 0..(1u64 << n) {
                    let y = CutAssignment::from_bits(n, bits);
                    let direct = cut_objective_oracle(&g, &y);
                    assert_eq!(uqp_objective(&inst, &y).unwrap(), direct);
                    assert_eq!(cut_size(&g, &y).unwrap() as f64, direct);
                }
            }
        }
    }

    #[test]
    fn uqp_bruteforce_argmax_sets() {
        let (v, opt) = uqp_bruteforce(&uqp_from_graph(&k3())).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(opt.len(), 6);

        let (v, opt) = uqp_bruteforce(&UqpInstance::new(3)).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(opt.len(), 8);

        let (v, opt) = uqp_bruteforce(&uqp_from_graph(&c4())).unwrap();
        assert_eq!(v, 4.0);
        let strings: Vec<_> = opt.iter().map(|y| y.to_bitstring()).collect();
        assert_eq!(strings, vec!["1010".to_string(), "0101".to_string()]);
    }

    #[test]
    fn optimality_gap_examples() {
        assert_eq!(optimality_gap(&uqp_from_graph(&k3())).unwrap(), 2.0);
        let k2 = AdjacencyMatrix::from_links(2, &[(0, 1)]).unwrap();
        assert_eq!(optimality_gap(&uqp_from_graph(&k2)).unwrap(), 1.0);
        assert!(matches!(optimality_gap(&UqpInstance::new(3)), Err(Error::AllOptimal)));
    }

    #[test]
    fn gap_at_least_one_for_connected_graphs() {
        for n in 2..=5 {
            for g in connected_graphs(n) {
                assert!(optimality_gap(&uqp_from_graph(&g)).unwrap() >= 1.0);
            }
        }
    }

    #[test]
    fn degree_identity_from_quad_row() {
        for g in connected_graphs(4) {
            let inst = uqp_from_graph(&g);
            for l in 0..4 {
                let row_sum: f64 = (0..4).filter(|&j| j != l).map(|j| inst.quad_coeff(l, j)).sum();
                assert_eq!(inst.lin_coeff(l), -0.5 * row_sum);
            }
        }
    }

    #[test]
    fn size_limit_enforced() {
        let g = AdjacencyMatrix::empty(21);
        assert!(matches!(maxcut_bruteforce(&g), Err(Error::TooLarge(_))));
    }
}
