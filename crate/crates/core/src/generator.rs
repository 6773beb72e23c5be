//! Feature-annotated random statement generator.
//!
//! Every grammar alternative that is a catalog feature is drawn through a
//! [`ChoiceContext`] whose weights come from the current feature states, so
//! Unsupported alternatives are never chosen. The features picked while
//! building a statement are its feature set.
//!
//! Randomness: one ChaCha8 stream per worker, seeded with the campaign seed
//! and selected by the worker index (`ChaCha8Rng::set_stream`).

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::feature::{
    choose_index, ids, redistribute, Catalog, Category, ChoiceContext, FeatureId, FeatureState,
    ParamType, SqlType, StateLookup,
};
use crate::schema::{ObjectClass, SchemaError, SchemaModel, TableDef};
use crate::sql::{
    infer_expr, needs_implicit_cast, render_statement, ColumnDef, ColumnRef, Expr, FromClause,
    Grammar, Join, JoinKind, Projection, Select, Statement, StatementKind, Value,
};

/// Chance that a node with depth budget left becomes a leaf anyway.
const LEAF_PROBABILITY: f64 = 0.2;
const CALL_ATTEMPTS: usize = 3;
const STATEMENT_ATTEMPTS: usize = 10;
const STRING_POOL: [&str; 10] = ["", "a", "b", "A", "abc", "%", "_", " x ", "0", "1"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypingMode {
    /// Every operand matches its signature.
    Static,
    /// Operand types are drawn freely.
    Dynamic,
    /// Dynamic until implicit casts are classified Unsupported, then Static.
    Learn,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub max_depth: u32,
    /// Statements between depth increments (I).
    pub depth_schedule_interval: u64,
    pub max_tables: usize,
    pub max_views: usize,
    pub seed: u64,
    pub typing_mode: TypingMode,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 3,
            depth_schedule_interval: 100_000,
            max_tables: 2,
            max_views: 1,
            seed: 0,
            typing_mode: TypingMode::Learn,
        }
    }
}

/// Expression depth after `executed` statements: one more level every I, capped.
pub fn current_depth(executed: u64, cfg: &GenConfig) -> u32 {
    let steps = executed / cfg.depth_schedule_interval.max(1);
    (1 + steps).min(u64::from(cfg.max_depth.max(1))) as u32
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error(transparent)]
    EmptySchema(#[from] SchemaError),
    #[error("{0:?} statements are suppressed: their feature is Unsupported")]
    Suppressed(StatementKind),
    #[error("no supported alternative for {0}")]
    Exhausted(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedStatement {
    pub sql: String,
    pub kind: StatementKind,
    /// Catalog indices of every feature the statement exercises.
    pub features: BTreeSet<usize>,
    pub ast: Statement,
}

/// Raw material for one oracle check: a WHERE-less query and a predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryCase {
    pub base: Select,
    pub predicate: Expr,
}

type Scope = Vec<(ColumnRef, SqlType)>;

struct States<'a>(&'a Catalog, &'a [FeatureState]);

impl StateLookup for States<'_> {
    fn state_of(&self, id: &FeatureId) -> FeatureState {
        self.0
            .index_of_id(id)
            .map(|i| self.1[i])
            .unwrap_or_default()
    }
}

/// A grammar rule whose alternatives are all catalog features.
#[derive(Clone, Debug)]
struct Rule {
    features: Vec<usize>,
    ctx: Option<ChoiceContext>,
}

impl Rule {
    fn new(catalog: &Catalog, name: &str, features: Vec<usize>) -> Rule {
        let ctx = ChoiceContext::uniform(
            name,
            features.iter().map(|&f| catalog.id(f).clone()).collect(),
        );
        Rule {
            features,
            ctx: Some(ctx),
        }
    }

    fn refresh(&mut self, catalog: &Catalog, states: &[FeatureState]) {
        let base = ChoiceContext::uniform(
            self.ctx
                .as_ref()
                .map(|c| c.rule_name.clone())
                .unwrap_or_default(),
            self.features
                .iter()
                .map(|&f| catalog.id(f).clone())
                .collect(),
        );
        self.ctx = redistribute(&base, &States(catalog, states)).ok();
    }
}

pub struct Generator {
    catalog: Arc<Catalog>,
    cfg: GenConfig,
    rng: ChaCha8Rng,
    states: Vec<FeatureState>,
    depth: u32,
    typed: bool,
    conflicts: HashSet<(usize, usize, Value)>,
    /// Expression rules by result type, in `SqlType::index` order.
    expr_rules: [Rule; 3],
    join_rule: Rule,
    type_rule: Rule,
    subquery: Option<usize>,
    picked: BTreeSet<usize>,
}

impl Generator {
    /// `stream` separates workers sharing one seed.
    pub fn new(catalog: Arc<Catalog>, cfg: GenConfig, stream: u64) -> Generator {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        let subquery = catalog.index_of(ids::SUBQUERY);
        let expr_rule = |t: SqlType| {
            let mut fs: Vec<usize> = catalog
                .expression_features()
                .filter(|&f| {
                    matches!(catalog.template(f).map(|t| t.result), Some(ParamType::Poly))
                        || catalog.template(f).map(|t| t.result) == Some(ParamType::Fixed(t))
                })
                .collect();
            if t == SqlType::Bool {
                fs.extend(subquery);
            }
            Rule::new(&catalog, &format!("expr_{}", t.tag()), fs)
        };
        let expr_rules = [
            expr_rule(SqlType::Int),
            expr_rule(SqlType::Str),
            expr_rule(SqlType::Bool),
        ];
        let join_rule = Rule::new(
            &catalog,
            "join",
            ids::JOINS
                .iter()
                .filter_map(|j| catalog.index_of(j))
                .collect(),
        );
        let type_rule = Rule::new(
            &catalog,
            "data_type",
            SqlType::ALL
                .iter()
                .filter_map(|t| catalog.index_of(t.data_type_feature()))
                .collect(),
        );
        let conflicts = Grammar::new(&catalog).keyword_conflicts();
        let states = vec![FeatureState::Unknown; catalog.len()];
        let typed = cfg.typing_mode == TypingMode::Static;
        Generator {
            catalog,
            cfg,
            rng,
            states,
            depth: 1,
            typed,
            conflicts,
            expr_rules,
            join_rule,
            type_rule,
            subquery,
            picked: BTreeSet::new(),
        }
    }

    pub fn config(&self) -> &GenConfig {
        &self.cfg
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Whether operands currently respect their signatures.
    pub fn is_typed(&self) -> bool {
        self.typed
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Takes a new snapshot of feature states and the depth to generate at.
    pub fn sync(&mut self, states: &[FeatureState], depth: u32) {
        self.states = states.to_vec();
        self.depth = depth.clamp(1, self.cfg.max_depth.max(1));
        let cast_unsupported = self.is_unsupported_id(ids::IMPLICIT_CAST);
        self.typed = match self.cfg.typing_mode {
            TypingMode::Static => true,
            TypingMode::Dynamic => false,
            TypingMode::Learn => cast_unsupported,
        };
        let (catalog, states) = (&self.catalog, &self.states);
        for rule in self
            .expr_rules
            .iter_mut()
            .chain([&mut self.join_rule, &mut self.type_rule])
        {
            rule.refresh(catalog, states);
        }
    }

    fn is_unsupported(&self, idx: usize) -> bool {
        self.states.get(idx) == Some(&FeatureState::Unsupported)
    }

    fn is_unsupported_id(&self, id: &str) -> bool {
        self.catalog
            .index_of(id)
            .is_some_and(|i| self.is_unsupported(i))
    }

    /// The optional feature `id` if it may be used, e.g. DISTINCT or UNIQUE.
    fn optional(&self, id: &str) -> Option<usize> {
        self.catalog
            .index_of(id)
            .filter(|&i| !self.is_unsupported(i))
    }

    /// Draws object names from `schema`'s counters, so a rejected statement's
    /// names are not reused.
    pub fn generate_statement(
        &mut self,
        kind: StatementKind,
        schema: &mut SchemaModel,
    ) -> Result<GeneratedStatement, GenError> {
        let kind_feature = self.catalog.index_of(kind.feature());
        if kind_feature.is_some_and(|f| self.is_unsupported(f)) {
            return Err(GenError::Suppressed(kind));
        }
        for _ in 0..STATEMENT_ATTEMPTS {
            self.picked.clear();
            self.picked.extend(kind_feature);
            let ast = match kind {
                StatementKind::CreateTable => self.create_table(schema)?,
                StatementKind::CreateIndex => self.create_index(schema)?,
                StatementKind::CreateView => self.create_view(schema)?,
                StatementKind::Insert => self.insert(&*schema)?,
                StatementKind::Analyze => Statement::Analyze,
                StatementKind::Select => {
                    let schema = &*schema;
                    let (mut sel, scope) = self.base_select(schema)?;
                    if let Some(d) = self.optional(ids::DISTINCT) {
                        if self.rng.gen_bool(0.2) {
                            sel.distinct = true;
                            self.picked.insert(d);
                        }
                    }
                    if let Some(w) = self.optional(ids::WHERE) {
                        if self.rng.gen_bool(0.7) {
                            sel.filter = Some(self.predicate(&scope, schema));
                            self.picked.insert(w);
                        }
                    }
                    Statement::Select(sel)
                }
            };
            if let Some(g) = self.finish(ast, &*schema) {
                return Ok(g);
            }
        }
        Err(GenError::Exhausted(format!(
            "{kind:?} without Unsupported features"
        )))
    }

    fn finish(&mut self, ast: Statement, schema: &SchemaModel) -> Option<GeneratedStatement> {
        let mut features = std::mem::take(&mut self.picked);
        if needs_implicit_cast(&self.catalog, &ast, schema) {
            features.extend(self.catalog.index_of(ids::IMPLICIT_CAST));
        }
        if features.iter().any(|&f| self.is_unsupported(f)) {
            return None;
        }
        Some(GeneratedStatement {
            sql: render_statement(&self.catalog, &ast),
            kind: ast.kind(),
            features,
            ast,
        })
    }

    /// A query and predicate for one oracle check. The base query has no
    /// DISTINCT and no WHERE, so it can be partitioned.
    pub fn generate_case(&mut self, schema: &SchemaModel) -> Result<QueryCase, GenError> {
        if self.is_unsupported_id(ids::SELECT) {
            return Err(GenError::Suppressed(StatementKind::Select));
        }
        let where_feature = self.catalog.index_of(ids::WHERE);
        for _ in 0..STATEMENT_ATTEMPTS {
            self.picked.clear();
            self.picked.extend(self.catalog.index_of(ids::SELECT));
            self.picked.extend(where_feature);
            let (base, scope) = self.base_select(schema)?;
            let predicate = self.predicate(&scope, schema);
            let mut full = base.clone();
            full.filter = Some(predicate.clone());
            if self.finish(Statement::Select(full), schema).is_some() {
                return Ok(QueryCase { base, predicate });
            }
        }
        Err(GenError::Exhausted(
            "query without Unsupported features".into(),
        ))
    }

    /// A boolean expression at the current depth; `scope` lists the columns in reach.
    pub fn generate_expression(
        &mut self,
        target: SqlType,
        depth_budget: u32,
        scope: &[(ColumnRef, SqlType)],
        schema: &SchemaModel,
    ) -> Expr {
        self.expr(target, depth_budget.max(1), scope, schema, &[])
            .expect("unconstrained leaves always exist")
    }

    /// Features picked since the last statement started.
    pub fn picked(&self) -> &BTreeSet<usize> {
        &self.picked
    }

    fn predicate(&mut self, scope: &[(ColumnRef, SqlType)], schema: &SchemaModel) -> Expr {
        let target = self.slot_type(SqlType::Bool);
        let depth = self.depth;
        self.expr(target, depth, scope, schema, &[])
            .expect("unconstrained leaves always exist")
    }

    /// Type to generate for a slot declared `want`: the declared type when
    /// typed, otherwise a coin flip between it and any type.
    fn slot_type(&mut self, want: SqlType) -> SqlType {
        if self.typed || self.rng.gen_bool(0.5) {
            want
        } else {
            *SqlType::ALL.choose(&mut self.rng).expect("nonempty")
        }
    }

    fn expr(
        &mut self,
        target: SqlType,
        budget: u32,
        scope: &[(ColumnRef, SqlType)],
        schema: &SchemaModel,
        forbid: &[Value],
    ) -> Option<Expr> {
        if budget > 1 && !self.rng.gen_bool(LEAF_PROBABILITY) {
            for _ in 0..CALL_ATTEMPTS {
                let Some(f) = pick(&self.expr_rules[target.index()], &mut self.rng) else {
                    break;
                };
                let mark = self.picked.clone();
                let node = if Some(f) == self.subquery {
                    self.exists(budget, schema)
                } else {
                    self.call(f, target, budget, scope, schema)
                };
                if let Some(node) = node {
                    return Some(node);
                }
                self.picked = mark;
            }
        }
        self.leaf(target, scope, forbid)
    }

    fn call(
        &mut self,
        f: usize,
        target: SqlType,
        budget: u32,
        scope: &[(ColumnRef, SqlType)],
        schema: &SchemaModel,
    ) -> Option<Expr> {
        let template = self
            .catalog
            .template(f)
            .expect("expression features have templates")
            .clone();
        let poly = match template.result {
            ParamType::Poly => target,
            ParamType::Fixed(_) => *SqlType::ALL.choose(&mut self.rng).expect("nonempty"),
        };
        self.picked.insert(f);
        let mut args = Vec::with_capacity(template.arity());
        for (i, slot) in template.slots().enumerate() {
            let declared = match slot {
                ParamType::Fixed(t) => t,
                ParamType::Poly => poly,
            };
            let t = self.slot_type(declared);
            let forbid: Vec<Value> = [Value::Null, Value::Bool(true), Value::Bool(false)]
                .into_iter()
                .filter(|v| self.conflicts.contains(&(f, i, v.clone())))
                .collect();
            args.push(self.expr(t, budget - 1, scope, schema, &forbid)?);
        }
        if self.catalog.category(f) == Category::Function {
            for (pos, arg) in args.iter().enumerate() {
                if let Ok(Some(t)) = infer_expr(&self.catalog, arg, schema) {
                    if let Some(c) = self.catalog.composite(f, pos, t) {
                        if self.is_unsupported(c) {
                            return None;
                        }
                        self.picked.insert(c);
                    }
                }
            }
        }
        let dtype = match template.result {
            ParamType::Fixed(t) => Some(t),
            ParamType::Poly => Some(poly),
        };
        Some(Expr::Call {
            feature: f,
            args,
            dtype,
        })
    }

    /// `EXISTS (SELECT c FROM t WHERE p)` over a single table, uncorrelated.
    fn exists(&mut self, budget: u32, schema: &SchemaModel) -> Option<Expr> {
        let table = schema.random_table(&mut self.rng).ok()?.clone();
        let scope = table_scope(&table);
        self.picked.extend(self.subquery);
        let col = scope
            .choose(&mut self.rng)
            .expect("tables have columns")
            .clone();
        let mut sel = Select {
            distinct: false,
            projection: Projection::Exprs(vec![Expr::Column {
                col: col.0,
                dtype: Some(col.1),
            }]),
            from: FromClause {
                first: table.name.clone(),
                joins: Vec::new(),
            },
            filter: None,
        };
        if let Some(w) = self.optional(ids::WHERE) {
            if budget > 2 || self.rng.gen_bool(0.5) {
                let t = self.slot_type(SqlType::Bool);
                sel.filter = Some(self.expr(t, budget - 1, &scope, schema, &[])?);
                self.picked.insert(w);
            }
        }
        Some(Expr::Exists(Box::new(sel)))
    }

    fn leaf(
        &mut self,
        target: SqlType,
        scope: &[(ColumnRef, SqlType)],
        forbid: &[Value],
    ) -> Option<Expr> {
        let any_type = !self.typed && self.rng.gen_bool(0.3);
        let columns: Vec<&(ColumnRef, SqlType)> = scope
            .iter()
            .filter(|(_, t)| any_type || *t == target)
            .collect();
        let constants = constant_domain(target, &mut self.rng);
        let constants: Vec<Value> = constants
            .into_iter()
            .filter(|v| !forbid.contains(v))
            .collect();
        let use_column = !columns.is_empty() && (constants.is_empty() || self.rng.gen_bool(0.5));
        if use_column {
            let (col, t) = (*columns.choose(&mut self.rng).expect("nonempty")).clone();
            return Some(Expr::Column {
                col,
                dtype: Some(t),
            });
        }
        let value = constants.choose(&mut self.rng)?.clone();
        Some(Expr::constant(value, target))
    }

    fn create_table(&mut self, schema: &mut SchemaModel) -> Result<Statement, GenError> {
        let name = schema.fresh_name(ObjectClass::Table);
        let n = self.rng.gen_range(1..=3);
        let mut columns = Vec::with_capacity(n);
        for _ in 0..n {
            let f = pick(&self.type_rule, &mut self.rng)
                .ok_or_else(|| GenError::Exhausted("data type".into()))?;
            self.picked.insert(f);
            let dtype = SqlType::ALL
                .into_iter()
                .find(|t| t.data_type_feature() == self.catalog.id(f).as_str())
                .expect("data type rule holds data type features");
            columns.push(ColumnDef {
                name: schema.fresh_name(ObjectClass::Column),
                dtype,
            });
        }
        Ok(Statement::CreateTable { name, columns })
    }

    fn create_index(&mut self, schema: &mut SchemaModel) -> Result<Statement, GenError> {
        let table = schema.random_base_table(&mut self.rng)?.clone();
        let name = schema.fresh_name(ObjectClass::Index);
        let k = self.rng.gen_range(1..=table.columns.len().min(2));
        let columns = table
            .columns
            .choose_multiple(&mut self.rng, k)
            .map(|c| c.name.clone())
            .collect();
        let mut unique = false;
        if let Some(u) = self.optional(ids::UNIQUE) {
            if self.rng.gen_bool(0.25) {
                unique = true;
                self.picked.insert(u);
            }
        }
        Ok(Statement::CreateIndex {
            name,
            table: table.name,
            columns,
            unique,
        })
    }

    fn create_view(&mut self, schema: &mut SchemaModel) -> Result<Statement, GenError> {
        let table = schema.random_base_table(&mut self.rng)?.clone();
        let name = schema.fresh_name(ObjectClass::View);
        let schema = &*schema;
        let scope = table_scope(&table);
        let k = self.rng.gen_range(1..=scope.len().min(3));
        let cols: Vec<(ColumnRef, SqlType)> =
            scope.choose_multiple(&mut self.rng, k).cloned().collect();
        let mut select = Select {
            distinct: false,
            projection: Projection::Exprs(
                cols.iter()
                    .map(|(c, t)| Expr::Column {
                        col: c.clone(),
                        dtype: Some(*t),
                    })
                    .collect(),
            ),
            from: FromClause {
                first: table.name.clone(),
                joins: Vec::new(),
            },
            filter: None,
        };
        if let Some(d) = self.optional(ids::DISTINCT) {
            if self.rng.gen_bool(0.2) {
                select.distinct = true;
                self.picked.insert(d);
            }
        }
        if let Some(w) = self.optional(ids::WHERE) {
            if self.rng.gen_bool(0.3) {
                select.filter = Some(self.predicate(&scope, schema));
                self.picked.insert(w);
            }
        }
        Ok(Statement::CreateView {
            name,
            columns: cols.into_iter().map(|(c, _)| c.column).collect(),
            select,
        })
    }

    fn insert(&mut self, schema: &SchemaModel) -> Result<Statement, GenError> {
        let table = schema.random_base_table(&mut self.rng)?.clone();
        let n = self.rng.gen_range(1..=10);
        let rows = (0..n)
            .map(|_| {
                table
                    .columns
                    .iter()
                    .map(|c| {
                        let t = if !self.typed && self.rng.gen_bool(0.1) {
                            *SqlType::ALL.choose(&mut self.rng).expect("nonempty")
                        } else {
                            c.dtype
                        };
                        let v = constant_domain(t, &mut self.rng)
                            .choose(&mut self.rng)
                            .expect("nonempty")
                            .clone();
                        Expr::constant(v, t)
                    })
                    .collect()
            })
            .collect();
        Ok(Statement::Insert {
            table: table.name,
            columns: table.columns.iter().map(|c| c.name.clone()).collect(),
            rows,
        })
    }

    /// `SELECT cols FROM t [JOIN ...]` over up to three distinct tables or views.
    fn base_select(&mut self, schema: &SchemaModel) -> Result<(Select, Scope), GenError> {
        if schema.tables().is_empty() {
            return Err(SchemaError::Empty.into());
        }
        let limit = schema
            .tables()
            .len()
            .min(self.cfg.max_tables + self.cfg.max_views)
            .max(1);
        let k = self.rng.gen_range(1..=limit);
        let tables: Vec<TableDef> = schema
            .tables()
            .choose_multiple(&mut self.rng, k)
            .cloned()
            .collect();
        let mut scope = table_scope(&tables[0]);
        let mut from = FromClause {
            first: tables[0].name.clone(),
            joins: Vec::new(),
        };
        for right in &tables[1..] {
            let rscope = table_scope(right);
            let Some(join) = self.join(&scope, right, &rscope, schema) else {
                break;
            };
            from.joins.push(join);
            scope.extend(rscope);
        }
        let n = self.rng.gen_range(1..=3);
        let items = (0..n)
            .map(|_| {
                let (col, t) = scope
                    .choose(&mut self.rng)
                    .expect("tables have columns")
                    .clone();
                Expr::Column {
                    col,
                    dtype: Some(t),
                }
            })
            .collect();
        Ok((
            Select {
                distinct: false,
                projection: Projection::Exprs(items),
                from,
                filter: None,
            },
            scope,
        ))
    }

    fn join(
        &mut self,
        left: &Scope,
        right: &TableDef,
        rscope: &Scope,
        schema: &SchemaModel,
    ) -> Option<Join> {
        for _ in 0..CALL_ATTEMPTS {
            let f = pick(&self.join_rule, &mut self.rng)?;
            let kind = JoinKind::from_feature(self.catalog.id(f).as_str())
                .expect("join rule holds join features");
            if kind == JoinKind::Natural && !self.natural_ok(left, right) {
                continue;
            }
            self.picked.insert(f);
            let on = if kind.has_condition() {
                let mut both = left.clone();
                both.extend(rscope.iter().cloned());
                Some(self.predicate(&both, schema))
            } else {
                None
            };
            return Some(Join {
                kind,
                table: right.name.clone(),
                on,
            });
        }
        None
    }

    /// Shared names must be unambiguous on the left, and equally typed when typing is on.
    fn natural_ok(&self, left: &Scope, right: &TableDef) -> bool {
        right.columns.iter().all(|c| {
            let same: Vec<SqlType> = left
                .iter()
                .filter(|(l, _)| l.column == c.name)
                .map(|(_, t)| *t)
                .collect();
            match same.as_slice() {
                [] => true,
                [t] => !self.typed || *t == c.dtype,
                _ => false,
            }
        })
    }
}

fn table_scope(t: &TableDef) -> Scope {
    t.columns
        .iter()
        .map(|c| {
            (
                ColumnRef {
                    table: t.name.clone(),
                    column: c.name.clone(),
                },
                c.dtype,
            )
        })
        .collect()
}

/// Boundary-biased literal domain of a type, NULL included.
fn constant_domain(t: SqlType, rng: &mut impl Rng) -> Vec<Value> {
    match t {
        SqlType::Int => vec![
            Value::Int(-1),
            Value::Int(0),
            Value::Int(1),
            Value::Int(2),
            Value::Int(i64::from(rng.gen::<i32>())),
            Value::Null,
        ],
        SqlType::Str => STRING_POOL
            .iter()
            .map(|s| Value::Text(s.to_string()))
            .chain([Value::Null])
            .collect(),
        SqlType::Bool => vec![Value::Bool(true), Value::Bool(false), Value::Null],
    }
}

fn pick(rule: &Rule, rng: &mut ChaCha8Rng) -> Option<usize> {
    let i = choose_index(rule.ctx.as_ref()?, rng).ok()?;
    Some(rule.features[i])
}
