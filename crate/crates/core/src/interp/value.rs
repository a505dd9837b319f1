use crate::syntax::escape_string;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjId(pub u32);

/// Runtime value. Objects live in a [`Heap`] and are referenced by handle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    Null,
    Obj(ObjId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Object {
    pub class: String,
    pub fields: IndexMap<String, Value>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Heap {
    objects: Vec<Object>,
}

impl Heap {
    pub fn alloc(&mut self, object: Object) -> ObjId {
        self.objects.push(object);
        ObjId((self.objects.len() - 1) as u32)
    }

    pub fn get(&self, id: ObjId) -> &Object {
        &self.objects[id.0 as usize]
    }

    pub fn get_mut(&mut self, id: ObjId) -> &mut Object {
        &mut self.objects[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Stable textual dump, used to check that observation leaves the heap untouched.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, obj) in self.objects.iter().enumerate() {
            out.push_str(&format!("{i}:{}{{", obj.class));
            for (name, v) in &obj.fields {
                out.push_str(&format!("{name}={},", self.render(v)));
            }
            out.push_str("}\n");
        }
        out
    }

    pub fn render(&self, v: &Value) -> String {
        match v {
            Value::Obj(id) => format!("{}@{}", self.get(*id).class, id.0),
            other => Primitive::try_from(other).map(|p| p.to_string()).unwrap_or_default(),
        }
    }
}

/// Structural equality used by `assertEquals`. Objects compare by class and
/// field-wise recursively; cycles are resolved coinductively via a visited-pair set.
pub fn deep_equal(heap: &Heap, a: &Value, b: &Value) -> bool {
    let mut visited: HashSet<(ObjId, ObjId)> = HashSet::new();
    let mut pending: Vec<(Value, Value)> = vec![(a.clone(), b.clone())];
    while let Some((x, y)) = pending.pop() {
        match (&x, &y) {
            (Value::Obj(i), Value::Obj(j)) => {
                if i == j || !visited.insert((*i, *j)) {
                    continue;
                }
                let (oi, oj) = (heap.get(*i), heap.get(*j));
                if oi.class != oj.class || oi.fields.len() != oj.fields.len() {
                    return false;
                }
                for ((ni, vi), (nj, vj)) in oi.fields.iter().zip(&oj.fields) {
                    if ni != nj {
                        return false;
                    }
                    pending.push((vi.clone(), vj.clone()));
                }
            }
            (Value::Obj(_), _) | (_, Value::Obj(_)) => return false,
            (p, q) => {
                if p != q {
                    return false;
                }
            }
        }
    }
    true
}

/// An observable value: anything but an object reference.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Primitive {
    Int(i64),
    Bool(bool),
    Str(String),
    Null,
}

impl TryFrom<&Value> for Primitive {
    type Error = ();

    fn try_from(v: &Value) -> Result<Self, ()> {
        Ok(match v {
            Value::Int(i) => Primitive::Int(*i),
            Value::Bool(b) => Primitive::Bool(*b),
            Value::Str(s) => Primitive::Str(s.clone()),
            Value::Null => Primitive::Null,
            Value::Obj(_) => return Err(()),
        })
    }
}

impl From<&Primitive> for Value {
    fn from(p: &Primitive) -> Self {
        match p {
            Primitive::Int(i) => Value::Int(*i),
            Primitive::Bool(b) => Value::Bool(*b),
            Primitive::Str(s) => Value::Str(s.clone()),
            Primitive::Null => Value::Null,
        }
    }
}

/// Renders as MTS source.
impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Primitive::Int(i) => write!(f, "{i}"),
            Primitive::Bool(b) => write!(f, "{b}"),
            Primitive::Str(s) => f.write_str(&escape_string(s)),
            Primitive::Null => f.write_str("null"),
        }
    }
}
