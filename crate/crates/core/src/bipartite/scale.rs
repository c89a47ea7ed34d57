//! Finite function families ordered by dominance modulo an explicit ideal,
//! and the trees with tops they generate.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteLK;
use crate::error::{Error, Result};
use crate::ladder::SparseTGraph;
use crate::tree::{NodeKey, OrderTree};

/// A proper, subset-closed family of subsets of `{0..k-1}` containing the
/// empty set. Sets are stored as bitmasks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "IdealDocument", into = "IdealDocument")]
pub struct Ideal {
    k: usize,
    members: BTreeSet<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealDocument {
    pub index_length: usize,
    pub members: Vec<Vec<usize>>,
}

fn to_mask(set: &[usize]) -> u64 {
    set.iter().fold(0, |m, &i| m | (1 << i))
}

fn from_mask(m: u64) -> Vec<usize> {
    (0..64).filter(|i| m >> i & 1 == 1).collect()
}

impl Ideal {
    pub fn new(k: usize, sets: &[Vec<usize>]) -> Result<Self> {
        if k > 63 {
            return Err(Error::invalid("index length above 63 is not supported"));
        }
        if let Some(i) = sets.iter().flatten().find(|&&i| i >= k) {
            return Err(Error::invalid(format!("index {i} is outside 0..{k}")));
        }
        let members: BTreeSet<u64> = sets.iter().map(|s| to_mask(s)).collect();
        let ideal = Ideal { k, members };
        ideal.validate()?;
        Ok(ideal)
    }

    /// The ideal `{∅}`.
    pub fn trivial(k: usize) -> Self {
        Ideal {
            k,
            members: BTreeSet::from([0]),
        }
    }

    /// All subsets of size at most `s` (proper when `s < k`).
    pub fn bounded(k: usize, s: usize) -> Result<Self> {
        let sets: Vec<Vec<usize>> = (0u64..(1 << k))
            .filter(|m| (m.count_ones() as usize) <= s)
            .map(from_mask)
            .collect();
        Ideal::new(k, &sets)
    }

    fn validate(&self) -> Result<()> {
        if !self.members.contains(&0) {
            return Err(Error::Validation("the ideal must contain the empty set".into()));
        }
        let full = if self.k == 0 { 0 } else { (1u64 << self.k) - 1 };
        if self.members.contains(&full) {
            return Err(Error::Validation(
                "the ideal must not contain the full index set".into(),
            ));
        }
        for &m in &self.members {
            for i in from_mask(m) {
                if !self.members.contains(&(m & !(1 << i))) {
                    return Err(Error::Validation(format!(
                        "{:?} is in the ideal but {:?} is not",
                        from_mask(m),
                        from_mask(m & !(1 << i))
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn index_length(&self) -> usize {
        self.k
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        self.members.contains(&to_mask(set))
    }
}

impl TryFrom<IdealDocument> for Ideal {
    type Error = Error;
    fn try_from(d: IdealDocument) -> Result<Self> {
        Ideal::new(d.index_length, &d.members)
    }
}

impl From<Ideal> for IdealDocument {
    fn from(i: Ideal) -> Self {
        IdealDocument {
            index_length: i.k,
            members: i.members.iter().map(|&m| from_mask(m)).collect(),
        }
    }
}

/// `{n : f(n) >= g(n)}`.
pub fn exceptional_set(f: &[u64], g: &[u64]) -> Result<Vec<usize>> {
    if f.len() != g.len() {
        return Err(Error::invalid(format!(
            "functions of lengths {} and {} cannot be compared",
            f.len(),
            g.len()
        )));
    }
    Ok((0..f.len()).filter(|&n| f[n] >= g[n]).collect())
}

/// `f <_I g`: the exceptional set of `(f, g)` lies in the ideal.
pub fn dominance(f: &[u64], g: &[u64], ideal: &Ideal) -> Result<bool> {
    Ok(ideal.contains(&exceptional_set(f, g)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScaleFamilyDocument", into = "ScaleFamilyDocument")]
pub struct ScaleFamily {
    bounds: Vec<u64>,
    functions: Vec<Vec<u64>>,
    ideal: Ideal,
}

#[derive(Serialize, Deserialize)]
struct ScaleFamilyDocument {
    bounds: Vec<u64>,
    functions: Vec<Vec<u64>>,
    ideal: Ideal,
}

impl TryFrom<ScaleFamilyDocument> for ScaleFamily {
    type Error = Error;
    fn try_from(d: ScaleFamilyDocument) -> Result<Self> {
        ScaleFamily::new(d.bounds, d.functions, d.ideal)
    }
}

impl From<ScaleFamily> for ScaleFamilyDocument {
    fn from(s: ScaleFamily) -> Self {
        ScaleFamilyDocument {
            bounds: s.bounds,
            functions: s.functions,
            ideal: s.ideal,
        }
    }
}

impl ScaleFamily {
    pub fn new(bounds: Vec<u64>, functions: Vec<Vec<u64>>, ideal: Ideal) -> Result<Self> {
        let s = ScaleFamily {
            bounds,
            functions,
            ideal,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.bounds.len();
        if self.ideal.index_length() != k {
            return Err(Error::Validation(
                "ideal and bounds disagree on the index length".into(),
            ));
        }
        if self.bounds.contains(&0) || self.bounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "bounds must be positive and strictly increasing".into(),
            ));
        }
        for (i, f) in self.functions.iter().enumerate() {
            self.check_function(f)
                .map_err(|e| Error::Validation(format!("function {i}: {e}")))?;
        }
        Ok(())
    }

    /// `f` has the right length and stays below the bounds.
    pub fn check_function(&self, f: &[u64]) -> Result<()> {
        if f.len() != self.bounds.len() {
            return Err(Error::invalid(format!(
                "length {} differs from {}",
                f.len(),
                self.bounds.len()
            )));
        }
        if let Some(n) = (0..f.len()).find(|&n| f[n] >= self.bounds[n]) {
            return Err(Error::invalid(format!(
                "value {} at {n} exceeds bound {}",
                f[n], self.bounds[n]
            )));
        }
        Ok(())
    }

    pub fn index_length(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[u64] {
        &self.bounds
    }

    pub fn functions(&self) -> &[Vec<u64>] {
        &self.functions
    }

    pub fn ideal(&self) -> &Ideal {
        &self.ideal
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderFailure {
    pub lower: usize,
    pub upper: usize,
    pub exceptional: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub function: Vec<u64>,
    pub exceptional_sets: Vec<Vec<usize>>,
    pub dominated_by: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub increasing: bool,
    pub order_failures: Vec<OrderFailure>,
    pub cofinal_on_tests: bool,
    /// Axiom (2) was checked only against this many supplied functions.
    pub tests_checked: usize,
    pub tests: Vec<TestOutcome>,
}

/// Axiom (1) exhaustively; axiom (2) only against `tests`.
pub fn verify_scale(s: &ScaleFamily, tests: &[Vec<u64>]) -> Result<ScaleReport> {
    let fs = s.functions();
    let mut order_failures = Vec::new();
    for a in 0..fs.len() {
        for b in a + 1..fs.len() {
            let e = exceptional_set(&fs[a], &fs[b])?;
            if !s.ideal().contains(&e) {
                order_failures.push(OrderFailure {
                    lower: a,
                    upper: b,
                    exceptional: e,
                });
            }
        }
    }
    let mut outcomes = Vec::new();
    for g in tests {
        s.check_function(g)?;
        let sets = fs.iter().map(|f| exceptional_set(g, f)).collect::<Result<Vec<_>>>()?;
        let dominated_by = sets.iter().position(|e| s.ideal().contains(e));
        outcomes.push(TestOutcome {
            function: g.clone(),
            exceptional_sets: sets,
            dominated_by,
        });
    }
    Ok(ScaleReport {
        increasing: order_failures.is_empty(),
        order_failures,
        cofinal_on_tests: outcomes.iter().all(|o| o.dominated_by.is_some()),
        tests_checked: tests.len(),
        tests: outcomes,
    })
}

fn seq(f: &[u64]) -> Vec<u32> {
    f.iter().map(|&x| x as u32).collect()
}

/// Tree of all prefixes of length at most `depth` of the family's functions,
/// with one top per function whose ladder is its prefix chain (root first).
pub fn build_scale_tree(s: &ScaleFamily, depth: usize) -> Result<SparseTGraph> {
    if depth > s.index_length() {
        return Err(Error::invalid(format!(
            "depth {depth} exceeds the index length {}",
            s.index_length()
        )));
    }
    let mut seen = BTreeSet::new();
    for (i, f) in s.functions().iter().enumerate() {
        if !seen.insert(f.clone()) {
            return Err(Error::invalid(format!("function {i} repeats an earlier one")));
        }
    }
    let prefixes = s
        .functions()
        .iter()
        .flat_map(|f| (1..=depth).map(move |l| seq(&f[..l])));
    let tree = OrderTree::from_finite_keys(prefixes)?;
    let tops: Vec<(Vec<u32>, Vec<u32>)> = s.functions().iter().map(|f| (seq(&f[..depth]), seq(f))).collect();
    let tree = tree.attach_keyed_tops(&tops)?;
    let ladders: BTreeMap<_, _> = tree.tops().iter().map(|&x| (x, tree.strict_down_closure(x))).collect();
    SparseTGraph::new(tree, ladders)
}

/// Side A = finite nodes, side B = tops, neighbour lists = ladders.
pub fn to_bipartite(g: &SparseTGraph, d: usize) -> Result<BipartiteLK> {
    let tree = g.tree();
    if tree.tops().is_empty() {
        return Err(Error::invalid("the tree has no tops, so side B would be empty"));
    }
    let finite: Vec<usize> = tree.finite_nodes().collect();
    let pos: BTreeMap<usize, usize> = finite.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let mut nbrs = Vec::new();
    for &x in tree.tops() {
        let l = g.ladder(x);
        if l.len() < d {
            return Err(Error::invalid(format!(
                "top {} has {} ladder entries, fewer than d = {d}",
                tree.key(x),
                l.len()
            )));
        }
        nbrs.push(l.iter().map(|t| pos[t]).collect());
    }
    BipartiteLK::new(
        finite.iter().map(|&t| tree.key(t).to_string()).collect(),
        tree.tops().iter().map(|&t| tree.key(t).to_string()).collect(),
        nbrs,
        d,
    )
}

/// Keys of the tops of a scale tree, one per function in family order.
pub fn top_key(f: &[u64]) -> NodeKey {
    NodeKey::Top(seq(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_are_validated_when_parsed() {
        let ok = r#"{"bounds":[3,5],"functions":[[0,0],[1,1]],"ideal":{"index_length":2,"members":[[]]}}"#;
        let s: ScaleFamily = serde_json::from_str(ok).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), ok);
        let out_of_bounds = ok.replace("[1,1]", "[4,1]");
        assert!(serde_json::from_str::<ScaleFamily>(&out_of_bounds).is_err());
    }

    fn worked() -> ScaleFamily {
        let ideal = Ideal::new(2, &[vec![], vec![0]]).unwrap();
        ScaleFamily::new(vec![3, 5], vec![vec![0, 0], vec![2, 1], vec![1, 2]], ideal).unwrap()
    }

    #[test]
    fn dominance_examples() {
        assert!(dominance(&[0, 0], &[2, 1], &Ideal::trivial(2)).unwrap());
        let i = Ideal::new(2, &[vec![], vec![0]]).unwrap();
        assert!(dominance(&[2, 1], &[1, 2], &i).unwrap());
        assert!(!dominance(&[1, 2], &[1, 2], &i).unwrap());
        assert!(dominance(&[1], &[1, 2], &i).is_err());
    }

    #[test]
    fn ideal_validation() {
        assert!(Ideal::new(2, &[vec![0]]).is_err());
        assert!(Ideal::new(2, &[vec![], vec![0, 1], vec![0], vec![1]]).is_err());
        assert!(Ideal::new(3, &[vec![], vec![0, 1]]).is_err());
        assert!(Ideal::bounded(3, 1).unwrap().contains(&[2]));
    }

    #[test]
    fn verify_examples() {
        let s = ScaleFamily::new(vec![5], (0..5).map(|a| vec![a]).collect(), Ideal::trivial(1)).unwrap();
        let tests: Vec<Vec<u64>> = (0..5).map(|a| vec![a]).collect();
        let r = verify_scale(&s, &tests).unwrap();
        assert!(r.increasing);
        assert!(!r.cofinal_on_tests);
        assert_eq!(r.tests[4].dominated_by, None);
        assert_eq!(r.tests[3].dominated_by, Some(4));

        let empty = ScaleFamily::new(vec![5], vec![], Ideal::trivial(1)).unwrap();
        let r = verify_scale(&empty, &[]).unwrap();
        assert!(r.increasing && r.cofinal_on_tests);

        let r = verify_scale(&worked(), &[vec![2, 4]]).unwrap();
        assert!(!r.cofinal_on_tests);
        assert_eq!(r.tests[0].exceptional_sets, vec![vec![0, 1], vec![0, 1], vec![0, 1]]);
    }

    #[test]
    fn scale_tree_shape() {
        let s = ScaleFamily::new(vec![2, 3], vec![vec![0, 0], vec![0, 1], vec![1, 0]], Ideal::trivial(2)).unwrap();
        let g = build_scale_tree(&s, 2).unwrap();
        assert_eq!(g.tree().level_sizes(), vec![1, 2, 3]);
        assert_eq!(g.tree().tops().len(), 3);
        let b = to_bipartite(&g, 3).unwrap();
        assert_eq!(b.side_a().len(), 6);
        for (i, &x) in g.tree().tops().iter().enumerate() {
            let f = &s.functions()[i];
            let want: Vec<String> = (0..=2).map(|l| NodeKey::Finite(seq(&f[..l])).to_string()).collect();
            let got: Vec<String> = b.nbrs(i).iter().map(|&a| b.side_a()[a].clone()).collect();
            assert_eq!(got, want);
            assert_eq!(g.tree().key(x), &top_key(f));
        }
        let dup = ScaleFamily::new(vec![2, 3], vec![vec![0, 0], vec![0, 0]], Ideal::trivial(2)).unwrap();
        assert!(build_scale_tree(&dup, 2).is_err());
        assert!(build_scale_tree(&s, 3).is_err());
    }

    #[test]
    fn no_tops_no_bipartite() {
        let s = ScaleFamily::new(vec![2], vec![], Ideal::trivial(1)).unwrap();
        let g = build_scale_tree(&s, 1).unwrap();
        assert!(to_bipartite(&g, 1).is_err());
    }
}
