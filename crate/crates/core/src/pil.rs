//! Propositional interaction logic: `φ ::= true | p | ¬φ | φ ∨ φ`, with
//! conjunction derived as `¬(¬φ₁ ∨ ¬φ₂)`. An interaction induces the
//! valuation that sets exactly its member ports to true.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{Interaction, InteractionSet, PortInstance};

/// Default bound on the number of ports enumerated by [`models_of_formula`].
pub const DEFAULT_UNIVERSE_BOUND: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PilError {
    #[error("cannot build a formula for an empty interaction set")]
    EmptySet,
    #[error("port {0} is outside the formula universe")]
    OutsideUniverse(PortInstance),
    #[error("universe of {size} ports exceeds the enumeration bound of {bound}")]
    UniverseTooLarge { size: usize, bound: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    Atom(PortInstance),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(p: PortInstance) -> Self {
        Formula::Atom(p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::or(Formula::not(a), Formula::not(b)))
    }

    /// Recognises the derived conjunction form.
    pub fn as_and(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Or(l, r) => match (l.as_ref(), r.as_ref()) {
                    (Formula::Not(a), Formula::Not(b)) => Some((a, b)),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    /// Every atom occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<PortInstance> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                Formula::True => {}
                Formula::Atom(p) => {
                    out.insert(p.clone());
                }
                Formula::Not(a) => stack.push(a),
                Formula::Or(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        out
    }

    fn eval_with(&self, holds: &dyn Fn(&PortInstance) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::Atom(p) => holds(p),
            Formula::Not(a) => !a.eval_with(holds),
            Formula::Or(a, b) => a.eval_with(holds) || b.eval_with(holds),
        }
    }

    fn collect_or<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        match self {
            Formula::Or(a, b) => {
                a.collect_or(out);
                b.collect_or(out);
            }
            f => out.push(f),
        }
    }

    fn collect_and<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        match self.as_and() {
            Some((a, b)) => {
                a.collect_and(out);
                b.collect_and(out);
            }
            None => out.push(self),
        }
    }
}

/// Folds a non-empty list into a balanced binary tree, keeping nesting
/// depth logarithmic for large monomial lists.
fn balanced(mut items: Vec<Formula>, join: fn(Formula, Formula) -> Formula) -> Formula {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => join(a, b),
                None => a,
            });
        }
        items = next;
    }
    items.pop().expect("balanced() needs at least one formula")
}

fn fmt_prec(f: &Formula, prec: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    // 0: disjunction, 1: conjunction, 2: negation operand
    if f.as_and().is_some() {
        let mut parts = Vec::new();
        f.collect_and(&mut parts);
        if prec > 1 {
            out.write_str("(")?;
        }
        for (i, p) in parts.iter().enumerate() {
            if i > 0 {
                out.write_str(" & ")?;
            }
            fmt_prec(p, 2, out)?;
        }
        if prec > 1 {
            out.write_str(")")?;
        }
        return Ok(());
    }
    match f {
        Formula::True => out.write_str("true"),
        Formula::Atom(p) => write!(out, "{p}"),
        Formula::Not(a) => {
            out.write_str("!")?;
            fmt_prec(a, 2, out)
        }
        Formula::Or(..) => {
            let mut parts = Vec::new();
            f.collect_or(&mut parts);
            if prec > 0 {
                out.write_str("(")?;
            }
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    out.write_str(" | ")?;
                }
                fmt_prec(p, 1, out)?;
            }
            if prec > 0 {
                out.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, f)
    }
}

/// Truth of `formula` under the valuation induced by `interaction`.
pub fn eval_pil(formula: &Formula, interaction: &Interaction) -> bool {
    formula.eval_with(&|p| interaction.contains(p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Satisfaction {
    Holds,
    Fails,
    /// The set is empty; satisfaction holds only vacuously.
    Vacuous,
}

impl Satisfaction {
    pub fn holds(self) -> bool {
        self != Satisfaction::Fails
    }
}

/// `γ ⊨ φ`: every interaction of the set satisfies the formula.
pub fn satisfies(set: &InteractionSet, formula: &Formula) -> Satisfaction {
    if set.is_empty() {
        Satisfaction::Vacuous
    } else if set.iter().all(|a| eval_pil(formula, a)) {
        Satisfaction::Holds
    } else {
        Satisfaction::Fails
    }
}

/// Disjunction of full monomials, one per interaction: members appear as
/// positive atoms, the rest of the universe negated, atoms in canonical order.
pub fn formula_of_interactions(set: &InteractionSet, universe: &BTreeSet<PortInstance>) -> Result<Formula, PilError> {
    if set.is_empty() {
        return Err(PilError::EmptySet);
    }
    let mut monomials = Vec::with_capacity(set.len());
    for a in set {
        if let Some(p) = a.iter().find(|p| !universe.contains(p)) {
            return Err(PilError::OutsideUniverse(p.clone()));
        }
        let literals = universe
            .iter()
            .map(|p| if a.contains(p) { Formula::atom(p.clone()) } else { Formula::not(Formula::atom(p.clone())) })
            .collect();
        monomials.push(balanced(literals, Formula::and));
    }
    Ok(balanced(monomials, Formula::or))
}

/// All non-empty subsets of `universe` satisfying `formula`, by enumeration.
pub fn models_of_formula(
    formula: &Formula,
    universe: &BTreeSet<PortInstance>,
    bound: usize,
) -> Result<InteractionSet, PilError> {
    if universe.len() > bound || universe.len() >= usize::BITS as usize {
        return Err(PilError::UniverseTooLarge { size: universe.len(), bound });
    }
    let ports: Vec<&PortInstance> = universe.iter().collect();
    let mut out = InteractionSet::new();
    for mask in 1usize..(1 << ports.len()) {
        let member = |p: &PortInstance| ports.iter().position(|q| *q == p).is_some_and(|i| mask & (1 << i) != 0);
        if formula.eval_with(&member) {
            let a = Interaction::new(
                ports.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, p)| (*p).clone()),
            )
            .expect("mask is non-zero");
            out.insert(a);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> PortInstance {
        PortInstance::new("C", 1, "p")
    }

    fn q(i: u32) -> PortInstance {
        PortInstance::new("S", i, "q")
    }

    fn ia(ports: &[PortInstance]) -> Interaction {
        Interaction::new(ports.iter().cloned()).unwrap()
    }

    fn star_universe() -> BTreeSet<PortInstance> {
        BTreeSet::from([p(), q(1), q(2), q(3)])
    }

    fn star_set() -> InteractionSet {
        InteractionSet::from([ia(&[p(), q(1)]), ia(&[p(), q(2)]), ia(&[p(), q(3)])])
    }

    /// p q1 ¬q2 ¬q3 ∨ p ¬q1 q2 ¬q3 ∨ p ¬q1 ¬q2 q3, written out by hand.
    fn star_formula() -> Formula {
        let lit = |x: PortInstance, pos: bool| {
            if pos {
                Formula::atom(x)
            } else {
                Formula::not(Formula::atom(x))
            }
        };
        let mono = |a, b, c| {
            Formula::and(Formula::and(Formula::and(lit(p(), true), lit(q(1), a)), lit(q(2), b)), lit(q(3), c))
        };
        Formula::or(Formula::or(mono(true, false, false), mono(false, true, false)), mono(false, false, true))
    }

    #[test]
    fn star_formula_evaluation() {
        let f = star_formula();
        assert!(eval_pil(&f, &ia(&[p(), q(1)])));
        assert!(!eval_pil(&f, &ia(&[p(), q(1), q(2)])));
        assert!(eval_pil(&Formula::True, &ia(&[q(2)])));
    }

    #[test]
    fn satisfaction() {
        let f = star_formula();
        assert_eq!(satisfies(&star_set(), &f), Satisfaction::Holds);
        let mut bigger = star_set();
        bigger.insert(ia(&[p(), q(1), q(2)]));
        assert_eq!(satisfies(&bigger, &f), Satisfaction::Fails);
        let empty = InteractionSet::new();
        assert_eq!(satisfies(&empty, &f), Satisfaction::Vacuous);
        assert!(satisfies(&empty, &f).holds());
    }

    #[test]
    fn canonical_formula_of_star() {
        let f = formula_of_interactions(&star_set(), &star_universe()).unwrap();
        assert_eq!(
            f.to_string(),
            "C[1].p & S[1].q & !S[2].q & !S[3].q | C[1].p & !S[1].q & S[2].q & !S[3].q | C[1].p & !S[1].q & !S[2].q & S[3].q"
        );
        let universe = star_universe();
        assert_eq!(models_of_formula(&f, &universe, 20).unwrap(), star_set());
        assert_eq!(models_of_formula(&star_formula(), &universe, 20).unwrap(), star_set());
    }

    #[test]
    fn singleton_formula_is_the_atom() {
        let set = InteractionSet::from([ia(&[p()])]);
        let f = formula_of_interactions(&set, &BTreeSet::from([p()])).unwrap();
        assert_eq!(f, Formula::atom(p()));
        assert_eq!(formula_of_interactions(&InteractionSet::new(), &star_universe()), Err(PilError::EmptySet));
    }

    #[test]
    fn models_by_enumeration() {
        let uni = BTreeSet::from([p()]);
        assert_eq!(models_of_formula(&Formula::True, &uni, 20).unwrap(), InteractionSet::from([ia(&[p()])]));
        let uni = BTreeSet::from([p(), q(1)]);
        let got = models_of_formula(&Formula::atom(p()), &uni, 20).unwrap();
        assert_eq!(got, InteractionSet::from([ia(&[p()]), ia(&[p(), q(1)])]));
        let big: BTreeSet<_> = (1..=21).map(q).collect();
        assert!(matches!(models_of_formula(&Formula::True, &big, 20), Err(PilError::UniverseTooLarge { .. })));
    }

    #[test]
    fn printing_parenthesises_nested_operators() {
        let f = Formula::not(Formula::or(Formula::atom(p()), Formula::atom(q(1))));
        assert_eq!(f.to_string(), "!(C[1].p | S[1].q)");
        let g = Formula::and(Formula::or(Formula::atom(p()), Formula::True), Formula::atom(q(1)));
        assert_eq!(g.to_string(), "(C[1].p | true) & S[1].q");
    }
}
