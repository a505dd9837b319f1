use crate::syntax::{Program, SiteId, Span};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};

/// Where each production site lives: its span and owning class/method.
#[derive(Clone, Debug)]
pub struct SiteIndex {
    file: String,
    sites: Vec<SiteInfo>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteInfo {
    pub span: Span,
    pub class: String,
    pub method: String,
}

impl SiteIndex {
    pub fn new(program: &Program) -> Self {
        let mut sites: Vec<Option<SiteInfo>> = vec![None; program.site_count()];
        for class in &program.classes {
            for method in &class.methods {
                method.body.visit_sites(&mut |s| {
                    sites[s.id.index()] =
                        Some(SiteInfo { span: s.span, class: class.name.clone(), method: method.name.clone() });
                });
            }
        }
        SiteIndex {
            file: program.file.clone(),
            sites: sites.into_iter().map(|s| s.expect("site ids are dense")).collect(),
        }
    }

    pub fn file(&self) -> &str {
        &self.file
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn info(&self, id: SiteId) -> &SiteInfo {
        &self.sites[id.index()]
    }

    pub fn contains(&self, id: SiteId) -> bool {
        id.index() < self.sites.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineKey {
    pub file: String,
    pub line: u32,
}

/// Executed production sites with their per-line projection.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoverageMap {
    covered: BTreeSet<SiteId>,
    per_line: BTreeMap<LineKey, u32>,
}

impl CoverageMap {
    pub fn from_sites(index: &SiteIndex, sites: impl IntoIterator<Item = SiteId>) -> Self {
        let mut map = CoverageMap::default();
        for id in sites {
            map.insert(index, id);
        }
        map
    }

    fn insert(&mut self, index: &SiteIndex, id: SiteId) {
        if self.covered.insert(id) {
            let key = LineKey { file: index.file().to_string(), line: index.info(id).span.line };
            *self.per_line.entry(key).or_insert(0) += 1;
        }
    }

    pub fn union_with(&mut self, index: &SiteIndex, other: &CoverageMap) {
        for id in &other.covered {
            self.insert(index, *id);
        }
    }

    pub fn covered(&self) -> &BTreeSet<SiteId> {
        &self.covered
    }

    pub fn per_line(&self) -> &BTreeMap<LineKey, u32> {
        &self.per_line
    }

    pub fn len(&self) -> usize {
        self.covered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covered.is_empty()
    }

    pub fn contains(&self, id: SiteId) -> bool {
        self.covered.contains(&id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("coverage map serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct CoverageJson {
    covered_sites: Vec<u32>,
    per_line: BTreeMap<String, u32>,
}

impl Serialize for CoverageMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CoverageJson {
            covered_sites: self.covered.iter().map(|s| s.0).collect(),
            per_line: self.per_line.iter().map(|(k, v)| (format!("{}:{}", k.file, k.line), *v)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoverageMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = CoverageJson::deserialize(d)?;
        let mut per_line = BTreeMap::new();
        for (key, count) in raw.per_line {
            let (file, line) = key.rsplit_once(':').ok_or_else(|| D::Error::custom(format!("bad line key {key:?}")))?;
            let line: u32 = line.parse().map_err(|_| D::Error::custom(format!("bad line number in {key:?}")))?;
            per_line.insert(LineKey { file: file.to_string(), line }, count);
        }
        Ok(CoverageMap { covered: raw.covered_sites.into_iter().map(SiteId).collect(), per_line })
    }
}
