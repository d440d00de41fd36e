//! Rules as `(precondition, recommended-action-set)` pairs, with activation
//! and consistency queries.
//!
//! A rule recommends a fixed set of actions whenever its precondition holds
//! on the current observation; its activation set is that recommendation or
//! empty. A rule set's activation set is the intersection of all non-empty
//! per-rule activation sets, and the set is *consistent* at an observation
//! when every pair of simultaneously active rules shares at least one
//! recommended action. The arbiter (module [`crate::interpose`]) only acts
//! when the activation set is non-empty and consistent.
//!
//! The engine is observation-agnostic: preconditions are arbitrary pure
//! predicates over a caller-chosen observation type.

use thiserror::Error;

/// Index into an environment's action space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub u8);

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Small set of actions with bitset semantics (exact ∩, ∖, =, ∅-tests).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ActionSet {
    bits: u16,
}

impl ActionSet {
    pub const EMPTY: ActionSet = ActionSet { bits: 0 };

    /// Set containing every action id below `n`.
    pub fn all_below(n: u8) -> Self {
        debug_assert!(n <= 16);
        ActionSet {
            bits: if n >= 16 { u16::MAX } else { (1u16 << n) - 1 },
        }
    }

    pub fn from_actions<I: IntoIterator<Item = ActionId>>(actions: I) -> Self {
        let mut set = ActionSet::EMPTY;
        for a in actions {
            set.insert(a);
        }
        set
    }

    pub fn insert(&mut self, a: ActionId) {
        debug_assert!(a.0 < 16);
        self.bits |= 1 << a.0;
    }

    pub fn contains(self, a: ActionId) -> bool {
        a.0 < 16 && self.bits & (1 << a.0) != 0
    }

    pub fn intersect(self, other: ActionSet) -> ActionSet {
        ActionSet {
            bits: self.bits & other.bits,
        }
    }

    /// Set difference `self ∖ other`.
    pub fn minus(self, other: ActionSet) -> ActionSet {
        ActionSet {
            bits: self.bits & !other.bits,
        }
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Member at position `i` in ascending action-id order.
    pub fn nth(self, i: usize) -> Option<ActionId> {
        self.iter().nth(i)
    }

    pub fn iter(self) -> impl Iterator<Item = ActionId> {
        (0..16u8).filter_map(move |i| {
            if self.bits & (1 << i) != 0 {
                Some(ActionId(i))
            } else {
                None
            }
        })
    }
}

impl FromIterator<ActionId> for ActionSet {
    fn from_iter<I: IntoIterator<Item = ActionId>>(iter: I) -> Self {
        ActionSet::from_actions(iter)
    }
}

/// Whether a rule is always enforced or fades with the interposing schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    Safety,
    Acceleration,
}

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("rule {0:?} has an empty recommendation set")]
    EmptyRecommendation(String),
    #[error("duplicate rule id {0:?} in rule set")]
    DuplicateId(String),
    #[error("rule {id:?} is {found:?} but the set is {expected:?}")]
    MixedKinds {
        id: String,
        expected: RuleKind,
        found: RuleKind,
    },
}

/// A precondition over observations paired with a non-empty set of
/// recommended actions.
///
/// The precondition must be deterministic and side-effect free: evaluating
/// it twice on the same observation yields the same truth value.
pub struct Rule<O: ?Sized> {
    id: String,
    kind: RuleKind,
    recommendation: ActionSet,
    precondition: Box<dyn Fn(&O) -> bool + Send + Sync>,
}

impl<O: ?Sized> Rule<O> {
    /// Rejects empty recommendations: a rule that recommends nothing is
    /// distinct from an inactive rule (recommend an explicit no-op action
    /// instead).
    pub fn new<F>(
        id: impl Into<String>,
        kind: RuleKind,
        recommendation: ActionSet,
        precondition: F,
    ) -> Result<Self, RuleError>
    where
        F: Fn(&O) -> bool + Send + Sync + 'static,
    {
        let id = id.into();
        if recommendation.is_empty() {
            return Err(RuleError::EmptyRecommendation(id));
        }
        Ok(Rule {
            id,
            kind,
            recommendation,
            precondition: Box::new(precondition),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn recommendation(&self) -> ActionSet {
        self.recommendation
    }

    /// The rule's activation set at `obs`: its recommendation when the
    /// precondition holds, empty otherwise. Never a proper non-empty subset.
    pub fn activation(&self, obs: &O) -> ActionSet {
        if (self.precondition)(obs) {
            self.recommendation
        } else {
            ActionSet::EMPTY
        }
    }
}

impl<O: ?Sized> std::fmt::Debug for Rule<O> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Rule")
            .field("id", &self.id)
            .field("kind", &self.kind)
            .field("recommendation", &self.recommendation)
            .finish_non_exhaustive()
    }
}

/// Ordered collection of rules of one kind with unique ids.
#[derive(Debug)]
pub struct RuleSet<O: ?Sized> {
    kind: RuleKind,
    rules: Vec<Rule<O>>,
}

impl<O: ?Sized> RuleSet<O> {
    pub fn new(kind: RuleKind, rules: Vec<Rule<O>>) -> Result<Self, RuleError> {
        for (i, rule) in rules.iter().enumerate() {
            if rule.kind != kind {
                return Err(RuleError::MixedKinds {
                    id: rule.id.clone(),
                    expected: kind,
                    found: rule.kind,
                });
            }
            if rules[..i].iter().any(|r| r.id == rule.id) {
                return Err(RuleError::DuplicateId(rule.id.clone()));
            }
        }
        Ok(RuleSet { kind, rules })
    }

    pub fn empty(kind: RuleKind) -> Self {
        RuleSet { kind, rules: Vec::new() }
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rule<O>> {
        self.rules.iter()
    }

    /// Intersection of all non-empty per-rule activation sets at `obs`.
    ///
    /// Empty when no rule is active (the learner should act autonomously)
    /// and also when active rules have no common action; callers that need
    /// to tell those apart use [`RuleSet::active_count`].
    pub fn kb_activation(&self, obs: &O) -> ActionSet {
        let mut result: Option<ActionSet> = None;
        for rule in &self.rules {
            let act = rule.activation(obs);
            if !act.is_empty() {
                result = Some(match result {
                    Some(acc) => acc.intersect(act),
                    None => act,
                });
            }
        }
        result.unwrap_or(ActionSet::EMPTY)
    }

    /// Number of rules whose activation set is non-empty at `obs`.
    pub fn active_count(&self, obs: &O) -> usize {
        self.rules
            .iter()
            .filter(|r| !r.activation(obs).is_empty())
            .count()
    }

    /// True iff the set holds at most one rule, or every pair of
    /// simultaneously active rules has intersecting activation sets.
    ///
    /// Pairwise consistency does not imply a non-empty global activation
    /// set; the arbiter checks both.
    pub fn is_consistent(&self, obs: &O) -> bool {
        if self.rules.len() <= 1 {
            return true;
        }
        let active: Vec<ActionSet> = self
            .rules
            .iter()
            .map(|r| r.activation(obs))
            .filter(|a| !a.is_empty())
            .collect();
        for i in 0..active.len() {
            for j in (i + 1)..active.len() {
                if active[i].intersect(active[j]).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule_if(id: &str, actions: &[u8], active: bool) -> Rule<()> {
        Rule::new(
            id,
            RuleKind::Acceleration,
            ActionSet::from_actions(actions.iter().map(|&a| ActionId(a))),
            move |_| active,
        )
        .unwrap()
    }

    fn set(actions: &[u8]) -> ActionSet {
        ActionSet::from_actions(actions.iter().map(|&a| ActionId(a)))
    }

    #[test]
    fn action_set_operations_are_exact() {
        let a = set(&[0, 1, 2]);
        let b = set(&[1, 2, 3]);
        assert_eq!(a.intersect(b), set(&[1, 2]));
        assert_eq!(a.minus(b), set(&[0]));
        assert_eq!(a.len(), 3);
        assert!(ActionSet::EMPTY.is_empty());
        assert_eq!(ActionSet::all_below(4), set(&[0, 1, 2, 3]));
        assert_eq!(a.nth(1), Some(ActionId(1)));
        assert_eq!(a.nth(3), None);
    }

    #[test]
    fn empty_recommendation_rejected_at_construction() {
        let err = Rule::<()>::new("r", RuleKind::Safety, ActionSet::EMPTY, |_| true);
        assert_eq!(
            err.err(),
            Some(RuleError::EmptyRecommendation("r".to_string()))
        );
    }

    #[test]
    fn activation_is_recommendation_or_empty() {
        let active = rule_if("a", &[0, 2], true);
        let inactive = rule_if("b", &[1], false);
        assert_eq!(active.activation(&()), set(&[0, 2]));
        assert_eq!(inactive.activation(&()), ActionSet::EMPTY);
    }

    #[test]
    fn kb_activation_empty_when_no_rule_active() {
        let rs = RuleSet::new(
            RuleKind::Acceleration,
            vec![rule_if("a", &[0], false), rule_if("b", &[1], false)],
        )
        .unwrap();
        assert_eq!(rs.kb_activation(&()), ActionSet::EMPTY);
        assert_eq!(rs.active_count(&()), 0);
    }

    #[test]
    fn kb_activation_single_active_rule() {
        let rs = RuleSet::new(
            RuleKind::Acceleration,
            vec![rule_if("a", &[0], true), rule_if("b", &[1], false)],
        )
        .unwrap();
        assert_eq!(rs.kb_activation(&()), set(&[0]));
        assert_eq!(rs.active_count(&()), 1);
    }

    #[test]
    fn kb_activation_intersects_active_rules() {
        let rs = RuleSet::new(
            RuleKind::Acceleration,
            vec![rule_if("a", &[0, 1], true), rule_if("b", &[1, 2], true)],
        )
        .unwrap();
        assert_eq!(rs.kb_activation(&()), set(&[1]));
    }

    #[test]
    fn empty_rule_set_has_zero_active_count() {
        let rs = RuleSet::<()>::empty(RuleKind::Acceleration);
        assert_eq!(rs.active_count(&()), 0);
        assert!(rs.is_consistent(&()));
    }

    #[test]
    fn singleton_set_is_consistent() {
        let rs = RuleSet::new(RuleKind::Acceleration, vec![rule_if("a", &[0], true)]).unwrap();
        assert!(rs.is_consistent(&()));
    }

    #[test]
    fn disjoint_active_rules_are_inconsistent() {
        let rs = RuleSet::new(
            RuleKind::Acceleration,
            vec![rule_if("a", &[0], true), rule_if("b", &[1], true)],
        )
        .unwrap();
        assert!(!rs.is_consistent(&()));
        assert_eq!(rs.kb_activation(&()), ActionSet::EMPTY);
    }

    #[test]
    fn pairwise_consistent_yet_empty_intersection() {
        // {a,b}, {b,c}, {a,c}: every pair intersects, global intersection empty.
        let rs = RuleSet::new(
            RuleKind::Acceleration,
            vec![
                rule_if("ab", &[0, 1], true),
                rule_if("bc", &[1, 2], true),
                rule_if("ac", &[0, 2], true),
            ],
        )
        .unwrap();
        assert!(rs.is_consistent(&()));
        assert_eq!(rs.kb_activation(&()), ActionSet::EMPTY);
        assert_eq!(rs.active_count(&()), 3);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = RuleSet::new(
            RuleKind::Acceleration,
            vec![rule_if("a", &[0], true), rule_if("a", &[1], true)],
        );
        assert_eq!(err.err(), Some(RuleError::DuplicateId("a".to_string())));
    }

    #[test]
    fn mixed_kinds_rejected() {
        let safety = Rule::<()>::new("s", RuleKind::Safety, set(&[0]), |_| true).unwrap();
        let err = RuleSet::new(RuleKind::Acceleration, vec![safety]);
        assert!(matches!(err, Err(RuleError::MixedKinds { .. })));
    }
}
