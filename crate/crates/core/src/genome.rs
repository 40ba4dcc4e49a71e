//! Genome representation: technique registry, genes, text serialization and
//! the variation operators.
//!
//! A genome is an ordered, non-empty list of technique calls. Its text form is
//! one gene per line, `name:value,value,...`, or a bare `name` for techniques
//! without parameters.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("technique name `{0}` is not a valid identifier")]
    InvalidName(String),
    #[error("duplicate technique name `{0}`")]
    DuplicateName(String),
    #[error("parameter `{param}` of `{technique}` has an empty or inverted domain")]
    InvalidDomain { technique: String, param: String },
    #[error("unknown technique `{0}`")]
    UnknownTechnique(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenomeError {
    #[error("every technique in the registry is excluded")]
    AllExcluded,
    #[error("genome length bounds must satisfy 1 <= min <= max (got {min}..={max})")]
    InvalidLengthBounds { min: usize, max: usize },
    #[error("a genome needs at least one gene")]
    Empty,
    #[error("gene `{gene}` is invalid: {reason}")]
    InvalidGene { gene: String, reason: String },
}

/// Distinct parse failure classes for the genome text format.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("genome text is empty")]
    Empty,
    #[error("line {line}: non-ASCII character in genome text")]
    NonAscii { line: usize },
    #[error("line {line}: empty gene")]
    EmptyGene { line: usize },
    #[error("line {line}: unknown technique `{name}`")]
    UnknownTechnique { line: usize, name: String },
    #[error("line {line}: `{technique}` takes {expected} argument(s), found {found}")]
    ArityMismatch {
        line: usize,
        technique: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, argument {position}: `{value}` is not a valid {expected}")]
    InvalidValue {
        line: usize,
        position: usize,
        value: String,
        expected: &'static str,
    },
    #[error("line {line}, argument {position}: `{value}` is outside the domain of `{param}`")]
    OutOfDomain {
        line: usize,
        position: usize,
        param: String,
        value: String,
    },
}

impl ParseError {
    /// 1-based line of the offending gene, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::NonAscii { line }
            | ParseError::EmptyGene { line }
            | ParseError::UnknownTechnique { line, .. }
            | ParseError::ArityMismatch { line, .. }
            | ParseError::InvalidValue { line, .. }
            | ParseError::OutOfDomain { line, .. } => Some(*line),
        }
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_graphic() && !matches!(b, b':' | b',' | b';'))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Integer { min: i64, max: i64 },
    Real { min: f64, max: f64 },
    Categorical(Vec<String>),
}

/// Inclusive value domain of one technique parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDomain {
    pub name: String,
    pub kind: DomainKind,
}

impl ParamDomain {
    pub fn integer(name: &str, min: i64, max: i64) -> Self {
        ParamDomain {
            name: name.to_string(),
            kind: DomainKind::Integer { min, max },
        }
    }

    pub fn real(name: &str, min: f64, max: f64) -> Self {
        ParamDomain {
            name: name.to_string(),
            kind: DomainKind::Real { min, max },
        }
    }

    pub fn categorical(name: &str, categories: &[&str]) -> Self {
        ParamDomain {
            name: name.to_string(),
            kind: DomainKind::Categorical(categories.iter().map(|c| c.to_string()).collect()),
        }
    }

    pub fn is_well_formed(&self) -> bool {
        match &self.kind {
            DomainKind::Integer { min, max } => min <= max,
            DomainKind::Real { min, max } => min.is_finite() && max.is_finite() && min <= max,
            DomainKind::Categorical(cats) => {
                !cats.is_empty() && cats.iter().all(|c| is_identifier(c))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamValue {
        match &self.kind {
            DomainKind::Integer { min, max } => ParamValue::Int(rng.random_range(*min..=*max)),
            DomainKind::Real { min, max } => ParamValue::Real(rng.random_range(*min..=*max)),
            DomainKind::Categorical(cats) => {
                ParamValue::Category(cats[rng.random_range(0..cats.len())].clone())
            }
        }
    }

    pub fn contains(&self, value: &ParamValue) -> bool {
        match (&self.kind, value) {
            (DomainKind::Integer { min, max }, ParamValue::Int(v)) => min <= v && v <= max,
            (DomainKind::Real { min, max }, ParamValue::Real(v)) => *min <= *v && *v <= *max,
            (DomainKind::Categorical(cats), ParamValue::Category(c)) => cats.contains(c),
            _ => false,
        }
    }

    fn kind_label(&self) -> &'static str {
        match self.kind {
            DomainKind::Integer { .. } => "integer",
            DomainKind::Real { .. } => "real number",
            DomainKind::Categorical(_) => "category",
        }
    }

    /// Parses the textual form of a value. Returns `None` when the text is not
    /// syntactically a value of this kind; domain membership is checked
    /// separately.
    fn parse_value(&self, text: &str) -> Option<ParamValue> {
        match &self.kind {
            DomainKind::Integer { .. } => text.parse().ok().map(ParamValue::Int),
            DomainKind::Real { .. } => text
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(ParamValue::Real),
            DomainKind::Categorical(_) => {
                is_identifier(text).then(|| ParamValue::Category(text.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Category(String),
}

impl ParamValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            ParamValue::Real(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn as_category(&self) -> Option<&str> {
        match self {
            ParamValue::Category(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            // `{}` on f64 prints the shortest string that parses back to the same value.
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Category(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TechniqueDescriptor {
    pub name: String,
    pub params: Vec<ParamDomain>,
    /// Excluded techniques stay renderable but are never sampled.
    pub excluded: bool,
}

impl TechniqueDescriptor {
    pub fn new(name: &str, params: Vec<ParamDomain>) -> Self {
        TechniqueDescriptor {
            name: name.to_string(),
            params,
            excluded: false,
        }
    }

    /// A gene of this technique with every parameter drawn uniformly from its domain.
    pub fn random_gene<R: Rng + ?Sized>(&self, rng: &mut R) -> TechniqueGene {
        TechniqueGene {
            technique: self.name.clone(),
            args: self.params.iter().map(|p| p.sample(rng)).collect(),
        }
    }
}

/// The technique grammar: names and parameter domains of every drawing technique.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    techniques: Vec<TechniqueDescriptor>,
}

impl Registry {
    pub fn new(techniques: Vec<TechniqueDescriptor>) -> Result<Self, RegistryError> {
        let mut seen = HashSet::new();
        for t in &techniques {
            if !is_identifier(&t.name) {
                return Err(RegistryError::InvalidName(t.name.clone()));
            }
            if !seen.insert(t.name.as_str()) {
                return Err(RegistryError::DuplicateName(t.name.clone()));
            }
            if let Some(p) = t.params.iter().find(|p| !p.is_well_formed()) {
                return Err(RegistryError::InvalidDomain {
                    technique: t.name.clone(),
                    param: p.name.clone(),
                });
            }
        }
        Ok(Registry { techniques })
    }

    pub fn techniques(&self) -> &[TechniqueDescriptor] {
        &self.techniques
    }

    pub fn get(&self, name: &str) -> Option<&TechniqueDescriptor> {
        self.techniques.iter().find(|t| t.name == name)
    }

    pub fn active(&self) -> impl Iterator<Item = &TechniqueDescriptor> {
        self.techniques.iter().filter(|t| !t.excluded)
    }

    pub fn active_count(&self) -> usize {
        self.active().count()
    }

    pub fn set_excluded(&mut self, name: &str, excluded: bool) -> Result<(), RegistryError> {
        let t = self
            .techniques
            .iter_mut()
            .find(|t| t.name == name)
            .ok_or_else(|| RegistryError::UnknownTechnique(name.to_string()))?;
        t.excluded = excluded;
        Ok(())
    }

    pub fn with_exclusions<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self, RegistryError> {
        for n in names {
            self.set_excluded(n.as_ref(), true)?;
        }
        Ok(self)
    }

    /// Same techniques with every exclusion lifted.
    pub fn without_exclusions(&self) -> Self {
        let mut r = self.clone();
        for t in &mut r.techniques {
            t.excluded = false;
        }
        r
    }
}

/// One parameterized technique call.
#[derive(Debug, Clone, PartialEq)]
pub struct TechniqueGene {
    pub technique: String,
    pub args: Vec<ParamValue>,
}

impl TechniqueGene {
    pub fn new(technique: &str, args: Vec<ParamValue>) -> Self {
        TechniqueGene {
            technique: technique.to_string(),
            args,
        }
    }

    pub fn validate(&self, registry: &Registry) -> Result<(), GenomeError> {
        let invalid = |reason: String| GenomeError::InvalidGene {
            gene: self.to_string(),
            reason,
        };
        let desc = registry
            .get(&self.technique)
            .ok_or_else(|| invalid("unknown technique".into()))?;
        if desc.params.len() != self.args.len() {
            return Err(invalid(format!(
                "expected {} arguments, found {}",
                desc.params.len(),
                self.args.len()
            )));
        }
        for (domain, value) in desc.params.iter().zip(&self.args) {
            if !domain.contains(value) {
                return Err(invalid(format!("`{value}` outside domain of `{}`", domain.name)));
            }
        }
        Ok(())
    }
}

impl fmt::Display for TechniqueGene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.technique)?;
        for (i, a) in self.args.iter().enumerate() {
            f.write_str(if i == 0 { ":" } else { "," })?;
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// An evolvable drawing program: a non-empty ordered list of genes.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    genes: Vec<TechniqueGene>,
}

impl Genome {
    pub fn new(genes: Vec<TechniqueGene>) -> Result<Self, GenomeError> {
        if genes.is_empty() {
            return Err(GenomeError::Empty);
        }
        Ok(Genome { genes })
    }

    pub fn genes(&self) -> &[TechniqueGene] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    /// Always false; genomes hold at least one gene.
    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn validate(&self, registry: &Registry) -> Result<(), GenomeError> {
        self.genes.iter().try_for_each(|g| g.validate(registry))
    }

    pub fn serialize(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str, registry: &Registry) -> Result<Self, ParseError> {
        let body = text.trim_end_matches(['\n', '\r']);
        if body.trim().is_empty() {
            return Err(ParseError::Empty);
        }
        let genes = body
            .split('\n')
            .enumerate()
            .map(|(i, line)| parse_gene(line.trim_end_matches('\r'), i + 1, registry))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Genome { genes })
    }

    /// Number of distinct technique names used.
    pub fn distinct_techniques(&self) -> usize {
        self.genes
            .iter()
            .map(|g| g.technique.as_str())
            .collect::<HashSet<_>>()
            .len()
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.genes.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

fn parse_gene(line: &str, line_no: usize, registry: &Registry) -> Result<TechniqueGene, ParseError> {
    if !line.is_ascii() {
        return Err(ParseError::NonAscii { line: line_no });
    }
    let line = line.trim();
    if line.is_empty() {
        return Err(ParseError::EmptyGene { line: line_no });
    }
    let (name, rest) = match line.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (line, None),
    };
    let desc = registry.get(name).ok_or_else(|| ParseError::UnknownTechnique {
        line: line_no,
        name: name.to_string(),
    })?;
    let raw: Vec<&str> = match rest {
        Some(r) if !r.trim().is_empty() => r.split(',').map(str::trim).collect(),
        _ => Vec::new(),
    };
    if raw.len() != desc.params.len() {
        return Err(ParseError::ArityMismatch {
            line: line_no,
            technique: desc.name.clone(),
            expected: desc.params.len(),
            found: raw.len(),
        });
    }
    let mut args = Vec::with_capacity(raw.len());
    for (i, (text, domain)) in raw.iter().zip(&desc.params).enumerate() {
        let value = domain.parse_value(text).ok_or_else(|| ParseError::InvalidValue {
            line: line_no,
            position: i + 1,
            value: text.to_string(),
            expected: domain.kind_label(),
        })?;
        if !domain.contains(&value) {
            return Err(ParseError::OutOfDomain {
                line: line_no,
                position: i + 1,
                param: domain.name.clone(),
                value: text.to_string(),
            });
        }
        args.push(value);
    }
    Ok(TechniqueGene {
        technique: desc.name.clone(),
        args,
    })
}

/// Uniform over non-excluded techniques, then uniform over each parameter domain.
pub fn random_gene<R: Rng + ?Sized>(
    registry: &Registry,
    rng: &mut R,
) -> Result<TechniqueGene, GenomeError> {
    let active: Vec<&TechniqueDescriptor> = registry.active().collect();
    if active.is_empty() {
        return Err(GenomeError::AllExcluded);
    }
    let desc = active[rng.random_range(0..active.len())];
    Ok(desc.random_gene(rng))
}

pub fn random_genome<R: Rng + ?Sized>(
    registry: &Registry,
    rng: &mut R,
    min_len: usize,
    max_len: usize,
) -> Result<Genome, GenomeError> {
    if min_len == 0 || min_len > max_len {
        return Err(GenomeError::InvalidLengthBounds {
            min: min_len,
            max: max_len,
        });
    }
    let len = rng.random_range(min_len..=max_len);
    let genes = (0..len)
        .map(|_| random_gene(registry, rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Genome { genes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverOutcome {
    Cloned,
    Spliced { cut_a: usize, cut_b: usize },
}

/// `a[..cut_a] ++ b[cut_b..]`. Cut points are clamped to the parents' lengths
/// and the child falls back to `a`'s first gene if the splice would be empty.
pub fn splice(a: &Genome, b: &Genome, cut_a: usize, cut_b: usize) -> Genome {
    let cut_a = cut_a.min(a.len());
    let cut_b = cut_b.min(b.len());
    let mut genes: Vec<TechniqueGene> = a.genes[..cut_a].to_vec();
    genes.extend_from_slice(&b.genes[cut_b..]);
    if genes.is_empty() {
        genes.push(a.genes[0].clone());
    }
    Genome { genes }
}

/// Single-point crossover applied with probability `rate`, otherwise a clone of `a`.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rate: f64, rng: &mut R) -> Genome {
    crossover_traced(a, b, rate, rng).0
}

/// Like [`crossover`], also reporting which branch was taken.
///
/// The cut in `a` is uniform on `1..=len(a)` and the cut in `b` uniform on
/// `0..len(b)`, drawn independently so the child length can change. When the
/// parents are equal the second cut mirrors the first, so the child equals them.
pub fn crossover_traced<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    rate: f64,
    rng: &mut R,
) -> (Genome, CrossoverOutcome) {
    if !rng.random_bool(rate.clamp(0.0, 1.0)) {
        return (a.clone(), CrossoverOutcome::Cloned);
    }
    let cut_a = rng.random_range(1..=a.len());
    let cut_b = if a == b {
        cut_a
    } else {
        rng.random_range(0..b.len())
    };
    (splice(a, b, cut_a, cut_b), CrossoverOutcome::Spliced { cut_a, cut_b })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutationMode {
    /// Replace the gene at a random index with a fresh random gene.
    Replace,
    /// Redraw every parameter of the gene at a random index.
    Resample,
    /// Randomly permute the gene order.
    Shuffle,
}

impl MutationMode {
    pub const ALL: [MutationMode; 3] = [
        MutationMode::Replace,
        MutationMode::Resample,
        MutationMode::Shuffle,
    ];
}

pub fn mutate<R: Rng + ?Sized>(genome: &Genome, registry: &Registry, rate: f64, rng: &mut R) -> Genome {
    mutate_traced(genome, registry, rate, rng).0
}

/// With probability `rate` applies one uniformly chosen [`MutationMode`].
pub fn mutate_traced<R: Rng + ?Sized>(
    genome: &Genome,
    registry: &Registry,
    rate: f64,
    rng: &mut R,
) -> (Genome, Option<MutationMode>) {
    if !rng.random_bool(rate.clamp(0.0, 1.0)) {
        return (genome.clone(), None);
    }
    let mode = MutationMode::ALL[rng.random_range(0..MutationMode::ALL.len())];
    (apply_mutation(genome, mode, registry, rng), Some(mode))
}

pub fn apply_mutation<R: Rng + ?Sized>(
    genome: &Genome,
    mode: MutationMode,
    registry: &Registry,
    rng: &mut R,
) -> Genome {
    let mut genes = genome.genes.clone();
    match mode {
        MutationMode::Replace => {
            let i = rng.random_range(0..genes.len());
            // An all-excluded registry leaves the gene untouched.
            if let Ok(g) = random_gene(registry, rng) {
                genes[i] = g;
            }
        }
        MutationMode::Resample => {
            let i = rng.random_range(0..genes.len());
            if let Some(desc) = registry.get(&genes[i].technique) {
                genes[i] = desc.random_gene(rng);
            }
        }
        MutationMode::Shuffle => genes.shuffle(rng),
    }
    Genome { genes }
}

/// `len(genes) - |distinct serialized genes|`; two genes are duplicates only
/// when technique and every argument agree.
pub fn duplicate_gene_count(genome: &Genome) -> usize {
    let distinct: HashSet<String> = genome.genes.iter().map(|g| g.to_string()).collect();
    genome.len() - distinct.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_registry() -> Registry {
        Registry::new(vec![
            TechniqueDescriptor::new(
                "circle-packing",
                vec![
                    ParamDomain::integer("seed", 0, 1000),
                    ParamDomain::integer("attempts", 1, 2000),
                    ParamDomain::integer("palette", 0, 7),
                ],
            ),
            TechniqueDescriptor::new("dots", vec![ParamDomain::real("density", 0.0, 1.0)]),
            TechniqueDescriptor::new("mode", vec![ParamDomain::categorical("style", &["a", "b"])]),
            TechniqueDescriptor::new("blank", vec![]),
        ])
        .unwrap()
    }

    fn gene(name: &str, args: Vec<ParamValue>) -> TechniqueGene {
        TechniqueGene::new(name, args)
    }

    #[test]
    fn serializes_with_colon_and_commas() {
        let g = Genome::new(vec![gene(
            "circle-packing",
            vec![ParamValue::Int(7), ParamValue::Int(500), ParamValue::Int(2)],
        )])
        .unwrap();
        assert_eq!(g.serialize(), "circle-packing:7,500,2");
        assert_eq!(Genome::parse("circle-packing:7,500,2", &toy_registry()).unwrap(), g);
    }

    #[test]
    fn bare_name_for_parameterless_technique() {
        let reg = toy_registry();
        let g = Genome::new(vec![gene("blank", vec![]), gene("dots", vec![ParamValue::Real(0.25)])])
            .unwrap();
        assert_eq!(g.serialize(), "blank\ndots:0.25");
        assert_eq!(Genome::parse("blank\ndots:0.25\n", &reg).unwrap(), g);
    }

    #[test]
    fn parse_error_classes() {
        let reg = toy_registry();
        assert_eq!(Genome::parse("", &reg), Err(ParseError::Empty));
        assert!(matches!(
            Genome::parse("nonexistent:1", &reg),
            Err(ParseError::UnknownTechnique { line: 1, .. })
        ));
        assert!(matches!(
            Genome::parse("blank\ncircle-packing:1,2", &reg),
            Err(ParseError::ArityMismatch { line: 2, expected: 3, found: 2, .. })
        ));
        assert!(matches!(
            Genome::parse("dots:1.5", &reg),
            Err(ParseError::OutOfDomain { position: 1, .. })
        ));
        assert!(matches!(
            Genome::parse("dots:abc", &reg),
            Err(ParseError::InvalidValue { .. })
        ));
        assert!(matches!(
            Genome::parse("blank\n\nblank", &reg),
            Err(ParseError::EmptyGene { line: 2 })
        ));
    }

    #[test]
    fn random_gene_single_parameterless_technique() {
        let reg = Registry::new(vec![TechniqueDescriptor::new("only", vec![])]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(random_gene(&reg, &mut rng).unwrap(), gene("only", vec![]));
    }

    #[test]
    fn all_excluded_is_an_error() {
        let reg = toy_registry()
            .with_exclusions(&["circle-packing", "dots", "mode", "blank"])
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(random_gene(&reg, &mut rng), Err(GenomeError::AllExcluded));
    }

    #[test]
    fn registry_rejects_bad_entries() {
        let dup = Registry::new(vec![
            TechniqueDescriptor::new("x", vec![]),
            TechniqueDescriptor::new("x", vec![]),
        ]);
        assert_eq!(dup, Err(RegistryError::DuplicateName("x".into())));
        let inverted = Registry::new(vec![TechniqueDescriptor::new(
            "x",
            vec![ParamDomain::integer("n", 5, 1)],
        )]);
        assert!(matches!(inverted, Err(RegistryError::InvalidDomain { .. })));
        let empty_cat = Registry::new(vec![TechniqueDescriptor::new(
            "x",
            vec![ParamDomain::categorical("c", &[])],
        )]);
        assert!(matches!(empty_cat, Err(RegistryError::InvalidDomain { .. })));
        assert!(matches!(
            Registry::new(vec![TechniqueDescriptor::new("a:b", vec![])]),
            Err(RegistryError::InvalidName(_))
        ));
    }

    #[test]
    fn random_genome_bounds() {
        let reg = toy_registry();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(random_genome(&reg, &mut rng, 3, 3).unwrap().len(), 3);
        assert_eq!(
            random_genome(&reg, &mut rng, 0, 3),
            Err(GenomeError::InvalidLengthBounds { min: 0, max: 3 })
        );
        assert!(random_genome(&reg, &mut rng, 4, 3).is_err());
    }

    #[test]
    fn splice_by_definition() {
        let g = |n: i64| gene("dots", vec![ParamValue::Real(n as f64 / 10.0)]);
        let a = Genome::new(vec![g(1), g(2)]).unwrap();
        let b = Genome::new(vec![g(3), g(4)]).unwrap();
        assert_eq!(splice(&a, &b, 1, 1).genes(), &[g(1), g(4)]);
    }

    #[test]
    fn crossover_of_identical_parents_is_identity() {
        let reg = toy_registry();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let a = random_genome(&reg, &mut rng, 1, 6).unwrap();
            let child = crossover(&a, &a.clone(), 0.5, &mut rng);
            assert_eq!(child, a);
        }
    }

    #[test]
    fn shuffle_of_single_gene_is_identity() {
        let reg = toy_registry();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Genome::new(vec![gene("dots", vec![ParamValue::Real(0.5)])]).unwrap();
        assert_eq!(apply_mutation(&g, MutationMode::Shuffle, &reg, &mut rng), g);
    }

    #[test]
    fn resample_of_parameterless_gene_is_identity() {
        let reg = toy_registry();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Genome::new(vec![gene("blank", vec![])]).unwrap();
        assert_eq!(apply_mutation(&g, MutationMode::Resample, &reg, &mut rng), g);
    }

    #[test]
    fn mutation_rate_zero_returns_input() {
        let reg = toy_registry();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_genome(&reg, &mut rng, 3, 3).unwrap();
        for _ in 0..100 {
            assert_eq!(mutate_traced(&g, &reg, 0.0, &mut rng), (g.clone(), None));
        }
    }

    #[test]
    fn duplicate_counts() {
        let a = gene("dots", vec![ParamValue::Real(0.1)]);
        let b = gene("dots", vec![ParamValue::Real(0.2)]);
        let g = |genes: Vec<TechniqueGene>| Genome::new(genes).unwrap();
        assert_eq!(duplicate_gene_count(&g(vec![a.clone(), a.clone(), b.clone()])), 1);
        assert_eq!(duplicate_gene_count(&g(vec![a.clone(), b.clone()])), 0);
        assert_eq!(
            duplicate_gene_count(&g(vec![a.clone(), a.clone(), a.clone(), b.clone(), b.clone()])),
            3
        );
    }

    #[test]
    fn empty_genome_rejected() {
        assert_eq!(Genome::new(vec![]), Err(GenomeError::Empty));
    }
}
