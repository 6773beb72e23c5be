use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use super::{ids, Category, FeatureId, Phase};

const DEFAULT_CATALOG: &str = include_str!("../../catalog/default.tsv");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("catalog is missing required feature `{0}`")]
    MissingRequired(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The three value types the generator produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SqlType {
    Int,
    Str,
    Bool,
}

impl SqlType {
    pub const ALL: [SqlType; 3] = [SqlType::Int, SqlType::Str, SqlType::Bool];

    /// Suffix used in composite argument-type features and template slots.
    pub fn tag(self) -> &'static str {
        match self {
            SqlType::Int => "INT",
            SqlType::Str => "STRING",
            SqlType::Bool => "BOOL",
        }
    }

    pub fn from_tag(tag: &str) -> Option<SqlType> {
        Some(match tag {
            "INT" => SqlType::Int,
            "STRING" => SqlType::Str,
            "BOOL" => SqlType::Bool,
            _ => return None,
        })
    }

    /// The data-type feature a column of this type carries.
    pub fn data_type_feature(self) -> &'static str {
        match self {
            SqlType::Int => ids::INTEGER,
            SqlType::Str => ids::TEXT,
            SqlType::Bool => ids::BOOLEAN,
        }
    }

    pub fn index(self) -> usize {
        match self {
            SqlType::Int => 0,
            SqlType::Str => 1,
            SqlType::Bool => 2,
        }
    }
}

impl fmt::Display for SqlType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Declared type of a template slot or result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamType {
    Fixed(SqlType),
    /// Unifies with every other `{T}` of the same template.
    Poly,
}

impl ParamType {
    fn parse(tag: &str) -> Option<ParamType> {
        if tag == "T" {
            Some(ParamType::Poly)
        } else {
            SqlType::from_tag(tag).map(ParamType::Fixed)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TemplatePart {
    Text(String),
    Slot(ParamType),
}

/// Rendering template of an operator or function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub parts: Vec<TemplatePart>,
    pub result: ParamType,
}

impl Template {
    pub fn parse(text: &str) -> Result<Template, String> {
        let (body, result) = text
            .rsplit_once(" :: ")
            .ok_or_else(|| format!("template `{text}` lacks ` :: RESULT`"))?;
        let result = ParamType::parse(result.trim())
            .ok_or_else(|| format!("bad result type `{}`", result.trim()))?;
        let mut parts = Vec::new();
        let mut rest = body;
        while let Some(open) = rest.find('{') {
            if open > 0 {
                parts.push(TemplatePart::Text(rest[..open].to_string()));
            }
            let close = rest[open..]
                .find('}')
                .ok_or_else(|| format!("unterminated placeholder in `{text}`"))?
                + open;
            let tag = &rest[open + 1..close];
            let slot =
                ParamType::parse(tag).ok_or_else(|| format!("bad placeholder `{{{tag}}}`"))?;
            parts.push(TemplatePart::Slot(slot));
            rest = &rest[close + 1..];
        }
        if !rest.is_empty() {
            parts.push(TemplatePart::Text(rest.to_string()));
        }
        let template = Template { parts, result };
        if template.arity() == 0 {
            return Err(format!("template `{text}` has no operands"));
        }
        if result == ParamType::Poly && !template.slots().any(|s| s == ParamType::Poly) {
            return Err(format!(
                "template `{text}` returns T without a {{T}} operand"
            ));
        }
        Ok(template)
    }

    pub fn arity(&self) -> usize {
        self.slots().count()
    }

    pub fn slots(&self) -> impl Iterator<Item = ParamType> + '_ {
        self.parts.iter().filter_map(|p| match p {
            TemplatePart::Slot(t) => Some(*t),
            TemplatePart::Text(_) => None,
        })
    }

    pub fn slot(&self, i: usize) -> ParamType {
        self.slots().nth(i).expect("slot index in range")
    }

    /// Substitutes rendered operands into the template.
    pub fn render(&self, args: &[String]) -> String {
        let mut out = String::new();
        let mut next = args.iter();
        for part in &self.parts {
            match part {
                TemplatePart::Text(t) => out.push_str(t),
                TemplatePart::Slot(_) => out.push_str(next.next().expect("argument per slot")),
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct FeatureEntry {
    pub id: FeatureId,
    pub category: Category,
    /// Raw third column of the catalog line.
    pub template_text: String,
    /// Parsed template for operators and functions.
    pub template: Option<Template>,
    /// For functions: composite feature indices per argument, indexed by `SqlType::index`.
    pub composites: Vec<[usize; 3]>,
    /// For composite features: the owning function, argument position (0-based) and type.
    pub composite_of: Option<(usize, usize, SqlType)>,
}

/// The feature universe: base features from the catalog file plus the
/// composite argument-type features derived from every function.
#[derive(Clone, Debug)]
pub struct Catalog {
    entries: Vec<FeatureEntry>,
    by_id: HashMap<FeatureId, usize>,
    base_len: usize,
}

impl Catalog {
    pub fn default_catalog() -> Catalog {
        Catalog::parse(DEFAULT_CATALOG).expect("bundled catalog is well-formed")
    }

    pub fn load(path: &Path) -> Result<Catalog, CatalogError> {
        Catalog::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Catalog, CatalogError> {
        let mut entries: Vec<FeatureEntry> = Vec::new();
        let mut by_id = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let err = |message: String| CatalogError::Parse {
                line: line_no,
                message,
            };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(err(format!(
                    "expected 3 tab-separated columns, found {}",
                    cols.len()
                )));
            }
            let category = Category::from_token(cols[0])
                .ok_or_else(|| err(format!("unknown category `{}`", cols[0])))?;
            if category == Category::CompositeArgType {
                return Err(err("composite features are derived, not declared".into()));
            }
            let id = FeatureId::new(cols[1])
                .ok_or_else(|| err(format!("invalid feature id `{}`", cols[1])))?;
            let template = match category {
                Category::Operator | Category::Function => {
                    Some(Template::parse(cols[2]).map_err(err)?)
                }
                _ => None,
            };
            if by_id.insert(id.clone(), entries.len()).is_some() {
                return Err(err(format!("duplicate feature `{id}`")));
            }
            entries.push(FeatureEntry {
                id,
                category,
                template_text: cols[2].to_string(),
                template,
                composites: Vec::new(),
                composite_of: None,
            });
        }
        let base_len = entries.len();
        for func in 0..base_len {
            if entries[func].category != Category::Function {
                continue;
            }
            let arity = entries[func].template.as_ref().map_or(0, Template::arity);
            let mut per_arg = Vec::with_capacity(arity);
            for pos in 0..arity {
                let mut slots = [0usize; 3];
                for ty in SqlType::ALL {
                    let name = format!("{}{}{}", entries[func].id, pos + 1, ty.tag());
                    let id = FeatureId::new(&name).ok_or_else(|| CatalogError::Parse {
                        line: 0,
                        message: format!("derived composite `{name}` is not a valid id"),
                    })?;
                    if by_id.contains_key(&id) {
                        return Err(CatalogError::Parse {
                            line: 0,
                            message: format!("composite `{name}` collides"),
                        });
                    }
                    slots[ty.index()] = entries.len();
                    by_id.insert(id.clone(), entries.len());
                    entries.push(FeatureEntry {
                        id,
                        category: Category::CompositeArgType,
                        template_text: String::new(),
                        template: None,
                        composites: Vec::new(),
                        composite_of: Some((func, pos, ty)),
                    });
                }
                per_arg.push(slots);
            }
            entries[func].composites = per_arg;
        }
        let catalog = Catalog {
            entries,
            by_id,
            base_len,
        };
        for required in [
            ids::CREATE_TABLE,
            ids::INSERT,
            ids::SELECT,
            ids::WHERE,
            ids::NOT,
            ids::IS_NULL,
            ids::IS_TRUE,
        ] {
            if catalog.index_of(required).is_none() {
                return Err(CatalogError::MissingRequired(required));
            }
        }
        if !SqlType::ALL
            .iter()
            .any(|t| catalog.index_of(t.data_type_feature()).is_some())
        {
            return Err(CatalogError::MissingRequired("INTEGER|TEXT|BOOLEAN"));
        }
        Ok(catalog)
    }

    /// Renders the catalog file form (base features only).
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for e in &self.entries[..self.base_len] {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                e.category.token(),
                e.id,
                e.template_text
            ));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of declared (non-composite) features.
    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn entries(&self) -> &[FeatureEntry] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> &FeatureEntry {
        &self.entries[idx]
    }

    pub fn id(&self, idx: usize) -> &FeatureId {
        &self.entries[idx].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        let id = FeatureId::new(id)?;
        self.by_id.get(&id).copied()
    }

    pub fn index_of_id(&self, id: &FeatureId) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize, CatalogError> {
        self.index_of(id)
            .ok_or_else(|| CatalogError::UnknownFeature(id.to_string()))
    }

    pub fn feature(&self, id: &str) -> Option<FeatureId> {
        self.index_of(id).map(|i| self.entries[i].id.clone())
    }

    pub fn template(&self, idx: usize) -> Option<&Template> {
        self.entries[idx].template.as_ref()
    }

    pub fn category(&self, idx: usize) -> Category {
        self.entries[idx].category
    }

    /// Index of the composite feature for argument `pos` (0-based) of `func` at type `ty`.
    pub fn composite(&self, func: usize, pos: usize, ty: SqlType) -> Option<usize> {
        self.entries[func]
            .composites
            .get(pos)
            .map(|slots| slots[ty.index()])
    }

    /// Operators and functions, the expression alternatives.
    pub fn expression_features(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.base_len).filter(|&i| {
            matches!(
                self.entries[i].category,
                Category::Operator | Category::Function
            )
        })
    }

    /// DDL/DML features are judged by the fail-count rule, everything else by the posterior rule.
    pub fn phase(&self, idx: usize) -> Phase {
        let e = &self.entries[idx];
        match e.category {
            Category::Statement if e.id.as_str() != ids::SELECT => Phase::Ddl,
            Category::DataType => Phase::Ddl,
            Category::ClauseKeyword if e.id.as_str() == ids::UNIQUE => Phase::Ddl,
            _ => Phase::Query,
        }
    }
}
