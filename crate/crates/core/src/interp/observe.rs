use super::machine::{Machine, Outcome};
use super::value::{Primitive, Value};
use crate::syntax::{Program, TestCase};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Observer name used for a variable that holds a primitive directly.
pub const VALUE_OBSERVER: &str = "@value";

/// Observed strings longer than this many characters are not asserted on.
pub const MAX_OBSERVED_STR_CHARS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObsKey {
    pub anchor: String,
    pub observer: String,
}

impl ObsKey {
    pub fn new(anchor: impl Into<String>, observer: impl Into<String>) -> Self {
        ObsKey { anchor: anchor.into(), observer: observer.into() }
    }
}

impl fmt::Display for ObsKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.observer == VALUE_OBSERVER {
            f.write_str(&self.anchor)
        } else {
            write!(f, "{}.{}()", self.anchor, self.observer)
        }
    }
}

/// Post-setup snapshots, ordered by variable declaration then observer declaration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ObservationSet {
    pub entries: IndexMap<ObsKey, Primitive>,
}

impl ObservationSet {
    pub fn get(&self, key: &ObsKey) -> Option<&Primitive> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The setup itself did not run to completion, so nothing was observed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObserveFailure {
    pub outcome: Outcome,
}

fn observable(p: Primitive) -> Option<Primitive> {
    match &p {
        Primitive::Str(s) if s.chars().count() > MAX_OBSERVED_STR_CHARS => None,
        _ => Some(p),
    }
}

/// Runs an assertion-free test body, then snapshots every variable: primitives
/// directly, objects through each of their zero-parameter methods. Each observer
/// call runs on its own copy of the heap with a fresh step budget.
pub fn observe(program: &Program, stripped: &TestCase, budget: u64) -> Result<ObservationSet, ObserveFailure> {
    let mut machine = Machine::new(program, budget);
    let (frame, result) = machine.run_body(&stripped.body);
    if let Err(halt) = result {
        return Err(ObserveFailure { outcome: halt.into() });
    }
    let mut set = ObservationSet::default();
    for (name, value) in &frame.locals {
        match value {
            Value::Obj(id) => {
                let class = machine
                    .class(&machine.heap.get(*id).class)
                    .expect("allocated objects have declared classes");
                for method in class.methods.iter().filter(|m| m.params.is_empty() && m.name != "init") {
                    let mut probe = Machine::with_heap(program, budget, machine.heap.clone());
                    let Ok(result) = probe.call_method(*id, method) else { continue };
                    if let Some(p) = Primitive::try_from(&result).ok().and_then(observable) {
                        set.entries.insert(ObsKey::new(name, &method.name), p);
                    }
                }
            }
            primitive => {
                let p = Primitive::try_from(primitive).expect("non-object values are primitive");
                if let Some(p) = observable(p) {
                    set.entries.insert(ObsKey::new(name, VALUE_OBSERVER), p);
                }
            }
        }
    }
    Ok(set)
}
