//! Seeded synthetic corpora with planted structure.
//!
//! Every generator here is deterministic in its seed and returns the plan it
//! planted, so tests can compare pipeline output against the plan instead of
//! against a second run of the pipeline.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cleaning::{CleaningRules, Decision, SourceSignature, Tier};
use crate::ids::{Pid, Qid, HUMAN, INSTANCE_OF, SUBCLASS_OF};
use crate::ingest::{ClaimValue, EntityRecord, MemoryLabels, Value};
use crate::schema::{CategoryDef, GateAddition, Indicator, IndicatorEdit, ModuleDef, ModuleKind, SchemaConfig, SchemaDiff};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn string(s: impl Into<String>) -> Value {
    Value::String { value: s.into() }
}

fn entity(q: u64) -> Value {
    Value::Entity { id: Qid(q) }
}

// ---------------------------------------------------------------- cleaning

const IMAGE: Pid = Pid(18);
const COORDINATES: Pid = Pid(625);
const WEBSITE: Pid = Pid(856);
const AWARD: Pid = Pid(166);
const COUNTRY: Pid = Pid(17);
const INDUSTRY: Pid = Pid(452);
const GEONAMES: Pid = Pid(1566);
const NATIVE_LABEL: Pid = Pid(1705);
const PUBMED: Pid = Pid(698);
const DOI: Pid = Pid(356);
const ARXIV: Pid = Pid(818);
const PMCID: Pid = Pid(932);
const RESEARCHGATE: Pid = Pid(5875);
/// Bulk markers that do not complete a source signature on their own.
const LOOSE_MARKERS: [Pid; 5] = [GEONAMES, PUBMED, ARXIV, PMCID, RESEARCHGATE];
/// Unweighted, unmarked filler properties.
const FILLER: [Pid; 6] = [Pid(571), Pid(1476), Pid(577), Pid(407), Pid(2044), Pid(1082)];
const INFRASTRUCTURE: [Qid; 2] = [Qid(4167836), Qid(4167410)];
const BULK_TYPES: [Qid; 3] = [Qid(13442814), Qid(523), Qid(318)];
const ORDINARY_TYPES: [Qid; 5] = [Qid(515), Qid(11424), Qid(7397), Qid(16521), Qid(783794)];

/// The cleaning rules shipped as `fixtures/cleaning_rules.yaml`.
pub fn reference_rules() -> CleaningRules {
    CleaningRules {
        infrastructure_types: [4167836, 4167410, 11266439, 13406463, 15184295].into_iter().map(Qid).collect(),
        bulk_import_types: BULK_TYPES.into_iter().collect(),
        source_signatures: vec![
            SourceSignature { name: "geonames-stub".into(), properties: [GEONAMES, NATIVE_LABEL].into() },
            SourceSignature { name: "citation-record".into(), properties: [PUBMED, DOI].into() },
        ],
        curation_weights: [(IMAGE, 3), (COORDINATES, 3), (WEBSITE, 3), (AWARD, 2), (Pid(800), 2), (COUNTRY, 1), (INDUSTRY, 1)]
            .into_iter()
            .collect(),
        people_curation_weights: [(Pid(106), 1), (Pid(69), 1)].into_iter().collect(),
        score_threshold: 3,
        bulk_ratio_threshold: 0.70,
        bulk_marker_properties: [GEONAMES, PUBMED, DOI, ARXIV, PMCID, RESEARCHGATE].into(),
    }
}

/// How many entities of each kind a cleaning corpus plants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CleaningPlan {
    pub total: usize,
    pub infrastructure: usize,
    /// Instances of a bulk-import type, protected ones included.
    pub bulk_types: usize,
    pub bulk_types_protected: usize,
    /// Carry a full source signature, protected ones included.
    pub signatures: usize,
    pub signatures_protected: usize,
    /// Marker ratio at or above the threshold with a low score.
    pub ratio_net: usize,
    /// Marker ratio at or above the threshold but a high score.
    pub ratio_notable: usize,
}

impl Default for CleaningPlan {
    fn default() -> Self {
        CleaningPlan {
            total: 1000,
            infrastructure: 10,
            bulk_types: 180,
            bulk_types_protected: 25,
            signatures: 120,
            signatures_protected: 15,
            ratio_net: 50,
            ratio_notable: 20,
        }
    }
}

impl CleaningPlan {
    pub fn bulk(&self) -> usize {
        self.bulk_types + self.signatures
    }

    pub fn protected(&self) -> usize {
        self.bulk_types_protected + self.signatures_protected
    }

    pub fn expected_structural(&self) -> usize {
        self.infrastructure + self.bulk_types - self.bulk_types_protected
    }

    pub fn expected_signature(&self) -> usize {
        self.signatures - self.signatures_protected
    }

    pub fn expected_non_core(&self) -> usize {
        self.expected_structural() + self.expected_signature() + self.ratio_net
    }

    pub fn expected_core(&self) -> usize {
        self.total - self.expected_non_core()
    }

    fn plain(&self) -> usize {
        self.total - self.infrastructure - self.bulk() - self.ratio_net - self.ratio_notable
    }
}

/// The verdict an entity was built to receive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantedVerdict {
    pub id: Qid,
    pub decision: Decision,
    pub tier: Tier,
    pub protected: bool,
}

#[derive(Clone, Copy)]
enum Plant {
    Plain,
    Infrastructure,
    BulkType { protected: bool },
    Signature { protected: bool },
    RatioNet,
    RatioNotable,
}

fn low_score_props(rng: &mut ChaCha8Rng) -> Vec<Pid> {
    [vec![], vec![COUNTRY], vec![INDUSTRY], vec![COUNTRY, INDUSTRY], vec![AWARD]]
        .choose(rng)
        .cloned()
        .unwrap_or_default()
}

fn high_score_props(rng: &mut ChaCha8Rng) -> Vec<Pid> {
    [vec![IMAGE], vec![COORDINATES], vec![WEBSITE], vec![AWARD, COUNTRY], vec![IMAGE, WEBSITE, INDUSTRY]]
        .choose(rng)
        .cloned()
        .unwrap_or_default()
}

fn prop_value(p: Pid, n: u64) -> Value {
    match p {
        COUNTRY | INDUSTRY | AWARD => entity(30 + n % 7),
        COORDINATES => Value::Coordinate { latitude: (n % 90) as f64, longitude: (n % 180) as f64 },
        _ => string(format!("{p}-{n}")),
    }
}

fn plant(rng: &mut ChaCha8Rng, id: Qid, kind: Plant, threshold: f64) -> (EntityRecord, PlantedVerdict) {
    let mut props: Vec<Pid> = Vec::new();
    let mut types = vec![*ORDINARY_TYPES.choose(rng).expect("types")];
    let fillers = rng.gen_range(0..=2);
    let expect = |decision, tier, protected| PlantedVerdict { id, decision, tier, protected };
    let verdict = match kind {
        Plant::Plain => {
            props.extend(FILLER.choose_multiple(rng, fillers + 1));
            if rng.gen_bool(0.5) {
                props.extend(high_score_props(rng));
            } else {
                props.extend(low_score_props(rng));
            }
            if rng.gen_bool(0.3) {
                props.push(ARXIV);
            }
            expect(Decision::Core, Tier::DefaultCore, false)
        }
        Plant::Infrastructure => {
            types = vec![*INFRASTRUCTURE.choose(rng).expect("types")];
            props.extend(FILLER.choose_multiple(rng, fillers));
            // A high score never rescues structural pages.
            if rng.gen_bool(0.5) {
                props.extend(high_score_props(rng));
            }
            expect(Decision::NonCore, Tier::Structural, false)
        }
        Plant::BulkType { protected } => {
            types = vec![*BULK_TYPES.choose(rng).expect("types")];
            props.extend(FILLER.choose_multiple(rng, fillers));
            if protected {
                props.extend(high_score_props(rng));
                expect(Decision::Core, Tier::DefaultCore, true)
            } else {
                props.extend(low_score_props(rng));
                expect(Decision::NonCore, Tier::Structural, false)
            }
        }
        Plant::Signature { protected } => {
            if rng.gen_bool(0.5) {
                props.extend([GEONAMES, NATIVE_LABEL]);
            } else {
                props.extend([PUBMED, DOI]);
            }
            props.extend(FILLER.choose_multiple(rng, fillers));
            if protected {
                props.extend(high_score_props(rng));
                expect(Decision::Core, Tier::DefaultCore, true)
            } else {
                props.extend(low_score_props(rng));
                expect(Decision::NonCore, Tier::Signature, false)
            }
        }
        Plant::RatioNet => {
            let k = rng.gen_range(3..=LOOSE_MARKERS.len());
            props.extend(LOOSE_MARKERS.choose_multiple(rng, k));
            // Keep markers / distinct at or above the threshold, counting P31.
            let room = ((k as f64 / threshold).floor() as usize).saturating_sub(1 + k);
            props.extend(low_score_props(rng).into_iter().take(room));
            expect(Decision::NonCore, Tier::RatioNet, false)
        }
        Plant::RatioNotable => {
            // 5 markers of 7 distinct properties, one of them an image.
            props.extend(LOOSE_MARKERS);
            props.push(IMAGE);
            expect(Decision::Core, Tier::DefaultCore, false)
        }
    };
    let mut r = EntityRecord::new(id).with_label("en", &format!("planted {}", id.0));
    for t in types {
        r = r.with_claim(INSTANCE_OF, ClaimValue::new(t));
    }
    let mut seen = BTreeSet::new();
    for p in props {
        if seen.insert(p) {
            let n = rng.gen_range(0..1000);
            r = r.with_claim(p, ClaimValue::new(prop_value(p, n)));
        }
    }
    (r, verdict)
}

/// Build a corpus following `plan` under [`reference_rules`]. Entity kinds
/// are interleaved in seeded random order.
pub fn cleaning_corpus(plan: &CleaningPlan, seed: u64) -> (Vec<EntityRecord>, Vec<PlantedVerdict>) {
    let mut rng = rng(seed);
    let threshold = reference_rules().bulk_ratio_threshold;
    let mut kinds = Vec::with_capacity(plan.total);
    kinds.extend(std::iter::repeat_n(Plant::Plain, plan.plain()));
    kinds.extend(std::iter::repeat_n(Plant::Infrastructure, plan.infrastructure));
    kinds.extend(std::iter::repeat_n(Plant::BulkType { protected: true }, plan.bulk_types_protected));
    kinds.extend(std::iter::repeat_n(Plant::BulkType { protected: false }, plan.bulk_types - plan.bulk_types_protected));
    kinds.extend(std::iter::repeat_n(Plant::Signature { protected: true }, plan.signatures_protected));
    kinds.extend(std::iter::repeat_n(Plant::Signature { protected: false }, plan.signatures - plan.signatures_protected));
    kinds.extend(std::iter::repeat_n(Plant::RatioNet, plan.ratio_net));
    kinds.extend(std::iter::repeat_n(Plant::RatioNotable, plan.ratio_notable));
    kinds.shuffle(&mut rng);
    kinds
        .into_iter()
        .enumerate()
        .map(|(i, k)| plant(&mut rng, Qid(1_000_000 + i as u64), k, threshold))
        .unzip()
}

// -------------------------------------------------------------- refinement

/// Type of the first unclassified population.
pub const TYPE_A: Qid = Qid(99_000_001);
/// Type of the second unclassified population.
pub const TYPE_B: Qid = Qid(99_000_002);

const OCCUPATION: Pid = Pid(106);
const LANGUAGES: Pid = Pid(1412);
const BIRTH: Pid = Pid(569);
const SPOUSE: Pid = Pid(26);
const POPULATION: Pid = Pid(1082);
const ELEVATION: Pid = Pid(2044);
const EMPLOYEES: Pid = Pid(1128);
const FOUNDED_BY: Pid = Pid(112);
const INCEPTION: Pid = Pid(571);
const CITY: Qid = Qid(515);
const MOUNTAIN: Qid = Qid(8502);
const COMPANY: Qid = Qid(783794);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementPlan {
    pub humans_with_module: usize,
    pub humans_without_module: usize,
    pub cities: usize,
    pub companies: usize,
    pub type_a: usize,
    pub type_b: usize,
}

impl Default for RefinementPlan {
    fn default() -> Self {
        RefinementPlan {
            humans_with_module: 210,
            humans_without_module: 90,
            cities: 200,
            companies: 100,
            type_a: 250,
            type_b: 150,
        }
    }
}

impl RefinementPlan {
    pub fn total(&self) -> usize {
        self.classified() + self.type_a + self.type_b
    }

    pub fn classified(&self) -> usize {
        self.humans_with_module + self.humans_without_module + self.cities + self.companies
    }

    /// r_c under the seed schema.
    pub fn seed_r_c(&self) -> f64 {
        self.classified() as f64 / self.total() as f64
    }

    /// r_m under the seed schema.
    pub fn seed_r_m(&self) -> f64 {
        1.0 - self.humans_without_module as f64 / self.classified() as f64
    }
}

pub struct RefinementFixture {
    pub schema: SchemaConfig,
    pub records: Vec<EntityRecord>,
    pub labels: MemoryLabels,
    /// Scripted oracle answers that close every gap in one round.
    pub script: String,
    pub plan: RefinementPlan,
}

fn module(name: &str, kind: ModuleKind, indicators: Vec<Indicator>, value_props: &[Pid]) -> ModuleDef {
    ModuleDef {
        name: name.into(),
        kind,
        indicators,
        value_props: value_props.iter().map(ToString::to_string).collect(),
    }
}

fn category(id: &str, gates: &[Qid], core: &[Pid], modules: Vec<ModuleDef>) -> CategoryDef {
    CategoryDef {
        id: id.into(),
        gate_values: gates.iter().map(ToString::to_string).collect(),
        core_properties: core.iter().map(ToString::to_string).collect(),
        modules,
    }
}

fn refinement_labels() -> Vec<(String, &'static str)> {
    let items = [
        (HUMAN, "human"),
        (CITY, "city"),
        (MOUNTAIN, "mountain"),
        (COMPANY, "company"),
        (TYPE_A, "lake"),
        (TYPE_B, "startup"),
    ];
    let props = [
        (INSTANCE_OF, "instance of"),
        (OCCUPATION, "occupation"),
        (LANGUAGES, "languages spoken, written or signed"),
        (BIRTH, "date of birth"),
        (SPOUSE, "spouse"),
        (Pid(40), "child"),
        (POPULATION, "population"),
        (ELEVATION, "elevation above sea level"),
        (EMPLOYEES, "employees"),
        (FOUNDED_BY, "founded by"),
        (INCEPTION, "inception"),
        (COUNTRY, "country"),
    ];
    items
        .iter()
        .map(|(q, l)| (q.to_string(), *l))
        .chain(props.iter().map(|(p, l)| (p.to_string(), *l)))
        .collect()
}

/// The seed schema: people, places and organizations, none of which gates
/// [`TYPE_A`] or [`TYPE_B`], and a people module that misses part of the
/// humans.
pub fn refinement_seed_schema() -> SchemaConfig {
    let people = category(
        "people",
        &[HUMAN],
        &[BIRTH],
        vec![
            module(
                "career",
                ModuleKind::Intrinsic,
                vec![Indicator::presence(OCCUPATION.to_string()), Indicator::values(INSTANCE_OF.to_string(), [HUMAN.to_string()])],
                &[OCCUPATION],
            ),
            module("family", ModuleKind::Relational, vec![Indicator::presence(SPOUSE.to_string())], &[SPOUSE, Pid(40)]),
        ],
    );
    let places = category(
        "places",
        &[CITY],
        &[COUNTRY],
        vec![
            module("settlement", ModuleKind::Intrinsic, vec![Indicator::values(INSTANCE_OF.to_string(), [CITY.to_string()])], &[POPULATION]),
            module("nature", ModuleKind::Intrinsic, vec![Indicator::values(INSTANCE_OF.to_string(), [MOUNTAIN.to_string()])], &[ELEVATION]),
        ],
    );
    let organizations = category(
        "organizations",
        &[COMPANY],
        &[INCEPTION],
        vec![
            module("corporation", ModuleKind::Intrinsic, vec![Indicator::values(INSTANCE_OF.to_string(), [COMPANY.to_string()])], &[EMPLOYEES]),
            module("affiliation", ModuleKind::Relational, vec![Indicator::presence(FOUNDED_BY.to_string())], &[FOUNDED_BY]),
        ],
    );
    let mut s = SchemaConfig {
        version: "seed".into(),
        categories: vec![people, places, organizations],
        ..Default::default()
    };
    for (id, label) in refinement_labels() {
        if s.referenced_ids().contains(&id) {
            s.extra_labels.insert(id, label.to_string());
        }
    }
    s
}

pub fn refinement_fixture(plan: &RefinementPlan, seed: u64) -> RefinementFixture {
    let mut rng = rng(seed);
    let mut records = Vec::with_capacity(plan.total());
    let mut next = 2_000_000u64;
    let mut new_id = || {
        next += 1;
        Qid(next)
    };
    let mut humans = Vec::new();

    // The career module fires on P31=human, so "without module" humans must
    // not be typed human through P31; they reach the category via P279.
    for i in 0..plan.humans_with_module + plan.humans_without_module {
        let id = new_id();
        let with_module = i < plan.humans_with_module;
        let mut r = EntityRecord::new(id).with_label("en", &format!("person {}", id.0));
        r = r.with_claim(BIRTH, ClaimValue::new(Value::Time { value: format!("+19{:02}-01-01T00:00:00Z", rng.gen_range(0..100)) }));
        if with_module {
            r = r.with_claim(INSTANCE_OF, ClaimValue::new(HUMAN));
            r = r.with_claim(OCCUPATION, ClaimValue::new(entity(rng.gen_range(3_000_000..3_000_010))));
        } else {
            r = r.with_claim(SUBCLASS_OF, ClaimValue::new(HUMAN));
            r = r.with_claim(LANGUAGES, ClaimValue::new(entity(1860)));
        }
        humans.push(id);
        records.push(r);
    }
    for _ in 0..plan.cities {
        let id = new_id();
        records.push(
            EntityRecord::new(id)
                .with_label("en", &format!("city {}", id.0))
                .with_claim(INSTANCE_OF, ClaimValue::new(CITY))
                .with_claim(POPULATION, ClaimValue::new(Value::Quantity { amount: format!("+{}", rng.gen_range(1000..900000)), unit: None })),
        );
    }
    for _ in 0..plan.companies {
        let id = new_id();
        let founder = *humans.choose(&mut rng).expect("humans planted");
        records.push(
            EntityRecord::new(id)
                .with_label("en", &format!("company {}", id.0))
                .with_claim(INSTANCE_OF, ClaimValue::new(COMPANY))
                .with_claim(FOUNDED_BY, ClaimValue::new(founder)),
        );
    }
    for _ in 0..plan.type_a {
        let id = new_id();
        records.push(
            EntityRecord::new(id)
                .with_label("en", &format!("lake {}", id.0))
                .with_claim(INSTANCE_OF, ClaimValue::new(TYPE_A))
                .with_claim(ELEVATION, ClaimValue::new(Value::Quantity { amount: format!("+{}", rng.gen_range(1..3000)), unit: None })),
        );
    }
    for _ in 0..plan.type_b {
        let id = new_id();
        let founder = *humans.choose(&mut rng).expect("humans planted");
        records.push(
            EntityRecord::new(id)
                .with_label("en", &format!("startup {}", id.0))
                .with_claim(INSTANCE_OF, ClaimValue::new(TYPE_B))
                .with_claim(FOUNDED_BY, ClaimValue::new(founder)),
        );
    }
    records.shuffle(&mut rng);

    let mut labels = MemoryLabels::new();
    labels.extend_from_records(&records);
    for (id, label) in refinement_labels() {
        labels.insert(id.parse::<crate::ids::Ident>().expect("fixture id"), label);
    }
    let script = [
        serde_json::json!({"kind": "category", "subject": TYPE_A.to_string(), "verdict": "assign",
            "category": "places", "module": "nature", "rationale": "bodies of water are places"}),
        serde_json::json!({"kind": "category", "subject": TYPE_B.to_string(), "verdict": "assign",
            "category": "organizations", "module": "corporation", "rationale": "startups are companies"}),
        serde_json::json!({"kind": "module", "subject": "people", "verdict": "indicator",
            "module": "career", "property": LANGUAGES.to_string(), "values": [],
            "rationale": "language claims mark biographical records"}),
    ]
    .iter()
    .map(|v| v.to_string() + "\n")
    .collect();

    RefinementFixture { schema: refinement_seed_schema(), records, labels, script, plan: plan.clone() }
}

// ------------------------------------------------------------ random world

/// Id ranges used by the random generators.
#[derive(Clone, Copy, Debug)]
pub struct Universe {
    /// Type ids are `Q1..=types`.
    pub types: u64,
    /// Non-type properties are `P1000..P1000+props`.
    pub props: u32,
}

impl Default for Universe {
    fn default() -> Self {
        Universe { types: 40, props: 24 }
    }
}

impl Universe {
    fn prop(&self, rng: &mut ChaCha8Rng) -> Pid {
        Pid(1000 + rng.gen_range(0..self.props))
    }

    fn type_id(&self, rng: &mut ChaCha8Rng) -> Qid {
        Qid(rng.gen_range(1..=self.types))
    }

    /// Labels for every id the generators can emit into a schema.
    pub fn labels(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for t in 1..=self.types {
            out.insert(Qid(t).to_string(), format!("type {t}"));
        }
        for p in 0..self.props {
            out.insert(Pid(1000 + p).to_string(), format!("property {p}"));
        }
        out.insert(INSTANCE_OF.to_string(), "instance of".into());
        out.insert(SUBCLASS_OF.to_string(), "subclass of".into());
        out
    }

    pub fn label_store(&self) -> MemoryLabels {
        let mut m = MemoryLabels::new();
        for (id, l) in self.labels() {
            m.insert(id.parse::<crate::ids::Ident>().expect("universe id"), l);
        }
        m
    }
}

fn random_module(rng: &mut ChaCha8Rng, u: &Universe, name: String) -> ModuleDef {
    let kind = if rng.gen_bool(0.5) { ModuleKind::Intrinsic } else { ModuleKind::Relational };
    let mut indicators = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let p = u.prop(rng);
        if indicators.iter().any(|i: &Indicator| i.property == p.to_string()) {
            continue;
        }
        if rng.gen_bool(0.6) {
            indicators.push(Indicator::presence(p.to_string()));
        } else {
            let values: IndexSet<String> = (0..rng.gen_range(1..=3)).map(|_| u.type_id(rng).to_string()).collect();
            indicators.push(Indicator { property: p.to_string(), values });
        }
    }
    let mut props: IndexSet<String> = IndexSet::new();
    for _ in 0..rng.gen_range(1..=4) {
        props.insert(u.prop(rng).to_string());
    }
    ModuleDef { name, kind, indicators, value_props: props.into_iter().collect() }
}

/// A schema satisfying every validator invariant: disjoint gates, each gate
/// synchronized into a value-based type indicator, annotated ids.
pub fn random_schema(rng: &mut ChaCha8Rng, u: &Universe) -> SchemaConfig {
    let mut pool: Vec<u64> = (1..=u.types).collect();
    pool.shuffle(rng);
    let mut pool = pool.into_iter();
    let n_categories = rng.gen_range(1..=5);
    let mut categories = Vec::new();
    for c in 0..n_categories {
        let gates: Vec<Qid> = pool.by_ref().take(rng.gen_range(1..=3)).map(Qid).collect();
        let core: IndexSet<String> = (0..rng.gen_range(0..=3)).map(|_| u.prop(rng).to_string()).collect();
        let mut modules: Vec<ModuleDef> = (0..rng.gen_range(1..=4)).map(|m| random_module(rng, u, format!("m{c}_{m}"))).collect();
        for g in &gates {
            let m = rng.gen_range(0..modules.len());
            let type_prop = if rng.gen_bool(0.8) { INSTANCE_OF } else { SUBCLASS_OF }.to_string();
            let module = &mut modules[m];
            match module.indicators.iter_mut().find(|i| i.property == type_prop && !i.is_presence()) {
                Some(i) => {
                    i.values.insert(g.to_string());
                }
                None => module.indicators.push(Indicator::values(type_prop, [g.to_string()])),
            }
        }
        categories.push(CategoryDef {
            id: format!("c{c}"),
            gate_values: gates.iter().map(ToString::to_string).collect(),
            core_properties: core.into_iter().collect(),
            modules,
        });
    }
    let mut s = SchemaConfig { version: "random".into(), categories, ..Default::default() };
    let labels = u.labels();
    for id in s.referenced_ids() {
        if let Some(l) = labels.get(&id) {
            s.extra_labels.insert(id, l.clone());
        }
    }
    s
}

fn random_value(rng: &mut ChaCha8Rng, u: &Universe) -> Value {
    match rng.gen_range(0..10) {
        0..=5 => Value::Entity { id: Qid(rng.gen_range(1..=u.types + 200)) },
        6 => string(format!("s{}", rng.gen_range(0..100))),
        7 => Value::Time { value: format!("+{}-01-01T00:00:00Z", rng.gen_range(1000..2030)) },
        8 => Value::Quantity { amount: format!("+{}", rng.gen_range(0..1000)), unit: None },
        _ => Value::Coordinate { latitude: 1.5, longitude: -2.25 },
    }
}

/// An entity typed from a slightly larger range than the schema uses, so
/// some land outside every category.
pub fn random_entity(rng: &mut ChaCha8Rng, u: &Universe, id: Qid) -> EntityRecord {
    let mut r = EntityRecord::new(id);
    if rng.gen_bool(0.8) {
        r = r.with_label("en", &format!("entity {}", id.0));
    }
    for _ in 0..rng.gen_range(0..=2) {
        r = r.with_claim(INSTANCE_OF, ClaimValue::new(Qid(rng.gen_range(1..=u.types + 10))));
    }
    if rng.gen_bool(0.2) {
        r = r.with_claim(SUBCLASS_OF, ClaimValue::new(Qid(rng.gen_range(1..=u.types + 10))));
    }
    for _ in 0..rng.gen_range(0..=7) {
        let p = u.prop(rng);
        let mut c = ClaimValue::new(random_value(rng, u));
        if rng.gen_bool(0.15) {
            c = c.with_qualifier(u.prop(rng), random_value(rng, u));
        }
        r = r.with_claim(p, c);
    }
    r
}

/// Gate additions and indicator additions only, keeping gates disjoint
/// across categories so the result stays valid.
pub fn random_additive_diff(rng: &mut ChaCha8Rng, schema: &SchemaConfig, u: &Universe) -> SchemaDiff {
    let mut diff = SchemaDiff::default();
    let mut owned: BTreeSet<String> = schema.categories.iter().flat_map(|c| c.gate_values.iter().cloned()).collect();
    let labels = u.labels();
    for _ in 0..rng.gen_range(1..=3) {
        let c = schema.categories.choose(rng).expect("non-empty schema");
        let m = c.modules.choose(rng).expect("non-empty category");
        if rng.gen_bool(0.6) {
            let t = u.type_id(rng).to_string();
            if !owned.insert(t.clone()) && !c.gate_values.contains(&t) {
                continue;
            }
            diff.added_gates.push(GateAddition { category: c.id.clone(), type_id: t.clone(), module: Some(m.name.clone()) });
            diff.labels.insert(t.clone(), labels[&t].clone());
            diff.labels.insert(INSTANCE_OF.to_string(), "instance of".into());
        } else {
            let p = u.prop(rng).to_string();
            let values: Vec<String> = if rng.gen_bool(0.5) { vec![] } else { vec![u.type_id(rng).to_string()] };
            for id in values.iter().chain([&p]) {
                diff.labels.insert(id.clone(), labels[id].clone());
            }
            diff.indicator_edits.push(IndicatorEdit { category: c.id.clone(), module: m.name.clone(), property: p, values });
        }
    }
    diff
}

// ------------------------------------------------------- schema-shaped data

/// A corpus shaped by `schema`: most entities carry a gate type of some
/// category plus claims on its core, indicator and value properties.
/// Entity-valued claims point at other corpus entities or, for one in ten,
/// at ids outside the corpus (`Q97000000` and up).
pub fn corpus_for_schema(schema: &SchemaConfig, n: usize, seed: u64) -> Vec<EntityRecord> {
    let mut rng = rng(seed);
    let base = 5_000_000u64;
    let parse_p = |s: &String| s.parse::<Pid>().ok();
    let target = |rng: &mut ChaCha8Rng| -> Value {
        if rng.gen_bool(0.1) {
            entity(97_000_000 + rng.gen_range(0..500))
        } else {
            entity(base + rng.gen_range(0..n as u64))
        }
    };
    let value = |rng: &mut ChaCha8Rng, target: &dyn Fn(&mut ChaCha8Rng) -> Value| -> Value {
        match rng.gen_range(0..10) {
            0..=5 => target(rng),
            6 => Value::Time { value: format!("+{}-06-01T00:00:00Z", rng.gen_range(1800..2024)) },
            7 => Value::Quantity { amount: format!("+{}", rng.gen_range(1..100000)), unit: None },
            _ => string(format!("text {}", rng.gen_range(0..1000))),
        }
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let id = Qid(base + i as u64);
        let mut r = EntityRecord::new(id).with_label("en", &format!("entity {}", id.0));
        if rng.gen_bool(0.5) {
            r = r.with_description("en", &format!("synthetic entity number {i}"));
        }
        let Some(c) = schema.categories.choose(&mut rng).filter(|_| rng.gen_bool(0.85)) else {
            r = r.with_claim(INSTANCE_OF, ClaimValue::new(Qid(98_000_000 + rng.gen_range(0..50))));
            out.push(r);
            continue;
        };
        let gate = c.gate_values.iter().collect::<Vec<_>>().choose(&mut rng).and_then(|g| g.parse::<Qid>().ok());
        if let Some(g) = gate {
            r = r.with_claim(INSTANCE_OF, ClaimValue::new(g));
        }
        let mut props: Vec<Pid> = c.core_properties.iter().filter_map(parse_p).filter(|_| rng.gen_bool(0.5)).collect();
        let n_modules = rng.gen_range(0..=3).min(c.modules.len());
        for m in c.modules.choose_multiple(&mut rng, n_modules) {
            props.extend(m.indicators.iter().filter(|i| i.is_presence()).filter_map(|i| parse_p(&i.property)).take(1));
            props.extend(m.value_props.choose_multiple(&mut rng, 2).filter_map(parse_p));
        }
        for p in props {
            if p == INSTANCE_OF || p == SUBCLASS_OF {
                continue;
            }
            for _ in 0..rng.gen_range(1..=2) {
                let mut cv = ClaimValue::new(value(&mut rng, &target));
                if rng.gen_bool(0.2) {
                    cv = cv.with_qualifier(Pid(580), Value::Time { value: format!("+{}-01-01T00:00:00Z", rng.gen_range(1900..2020)) });
                }
                if rng.gen_bool(0.05) {
                    cv = cv.with_qualifier(Pid(1545), string(format!("{}", rng.gen_range(1..9))));
                }
                r = r.with_claim(p, cv);
            }
        }
        out.push(r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::validate_schema;

    #[test]
    fn cleaning_corpus_is_seed_stable() {
        let plan = CleaningPlan::default();
        let (a, pa) = cleaning_corpus(&plan, 7);
        let (b, pb) = cleaning_corpus(&plan, 7);
        assert_eq!(a, b);
        assert_eq!(pa, pb);
        assert_eq!(a.len(), plan.total);
    }

    #[test]
    fn random_schemas_validate() {
        let u = Universe::default();
        let labels = u.label_store();
        let mut r = rng(1);
        for _ in 0..50 {
            let s = random_schema(&mut r, &u);
            let report = validate_schema(&s, &labels);
            assert!(report.is_valid(), "{:?}", report.violations);
        }
    }

    #[test]
    fn refinement_seed_validates() {
        let f = refinement_fixture(&RefinementPlan::default(), 3);
        assert!(validate_schema(&f.schema, &f.labels).is_valid());
        assert_eq!(f.records.len(), f.plan.total());
    }
}
