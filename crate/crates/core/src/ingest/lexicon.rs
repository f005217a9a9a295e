//! Closed CLEVRER-style vocabulary: event verbs with arity classes, object
//! colors/shapes/materials, and the alias table used for normalization.
//!
//! Both tables ship as TSV data files embedded at compile time so the
//! vocabulary stays auditable and extensible.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::model::{Color, EventArity, Material, ObjectRef, Shape};

const EVENTS_TSV: &str = include_str!("../../data/events.tsv");
const ALIASES_TSV: &str = include_str!("../../data/aliases.tsv");

#[derive(Debug, Clone)]
pub struct VerbEntry {
    pub lemma: String,
    pub arity: EventArity,
    /// Third-person singular form, used by the synthetic description templates.
    pub third_person: String,
}

#[derive(Debug)]
pub struct Lexicon {
    verbs: Vec<VerbEntry>,
    /// surface form (lowercase) -> index into `verbs`
    forms: HashMap<String, usize>,
    colors: HashMap<String, Color>,
    shapes: HashMap<String, Shape>,
    materials: HashMap<String, Material>,
}

impl Lexicon {
    fn build() -> Lexicon {
        let mut verbs = Vec::new();
        let mut forms = HashMap::new();
        for line in EVENTS_TSV.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let lemma = fields.next().expect("lemma field").to_owned();
            let arity = match fields.next().expect("arity field") {
                "singular" => EventArity::Singular,
                "binary" => EventArity::Binary,
                other => panic!("bad arity {other:?} in events.tsv"),
            };
            let third_person = fields.next().expect("third-person field").to_owned();
            let others = fields.next().unwrap_or("");
            let idx = verbs.len();
            forms.insert(lemma.clone(), idx);
            forms.insert(third_person.clone(), idx);
            for form in others.split(',').filter(|f| !f.is_empty()) {
                forms.insert(form.to_owned(), idx);
            }
            verbs.push(VerbEntry {
                lemma,
                arity,
                third_person,
            });
        }

        let mut colors: HashMap<String, Color> = Color::CANONICAL
            .into_iter()
            .map(|c| (c.as_str().to_owned(), c))
            .collect();
        let mut shapes: HashMap<String, Shape> = Shape::CANONICAL
            .into_iter()
            .map(|s| (s.as_str().to_owned(), s))
            .collect();
        let mut materials: HashMap<String, Material> = Material::CANONICAL
            .into_iter()
            .map(|m| (m.as_str().to_owned(), m))
            .collect();
        for line in ALIASES_TSV.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let field = fields.next().expect("field column");
            let alias = fields.next().expect("alias column").to_owned();
            let canonical = fields.next().expect("canonical column");
            match field {
                "color" => {
                    let c = colors[canonical];
                    colors.insert(alias, c);
                }
                "shape" => {
                    let s = shapes[canonical];
                    shapes.insert(alias, s);
                }
                "material" => {
                    let m = materials[canonical];
                    materials.insert(alias, m);
                }
                other => panic!("bad field {other:?} in aliases.tsv"),
            }
        }

        Lexicon {
            verbs,
            forms,
            colors,
            shapes,
            materials,
        }
    }

    pub fn verbs(&self) -> &[VerbEntry] {
        &self.verbs
    }

    pub fn verb(&self, lemma: &str) -> Option<&VerbEntry> {
        self.verbs.iter().find(|v| v.lemma == lemma)
    }

    /// Resolves any surface form (case-insensitive) to its verb entry.
    pub fn lookup_verb(&self, token: &str) -> Option<&VerbEntry> {
        self.forms
            .get(&token.to_lowercase())
            .map(|&i| &self.verbs[i])
    }

    pub fn lookup_color(&self, token: &str) -> Option<Color> {
        self.colors.get(&token.to_lowercase()).copied()
    }

    pub fn lookup_shape(&self, token: &str) -> Option<Shape> {
        self.shapes.get(&token.to_lowercase()).copied()
    }

    pub fn lookup_material(&self, token: &str) -> Option<Material> {
        self.materials.get(&token.to_lowercase()).copied()
    }
}

static LEXICON: OnceLock<Lexicon> = OnceLock::new();

pub fn lexicon() -> &'static Lexicon {
    LEXICON.get_or_init(Lexicon::build)
}

/// Object reference with raw (pre-normalization) field tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawObjectRef {
    pub color: Option<String>,
    pub shape: Option<String>,
    pub material: Option<String>,
}

/// Maps raw field tokens onto the canonical vocabulary. Aliases are resolved
/// (gold -> yellow, ball -> sphere, block -> cube, grey -> gray); tokens
/// outside the vocabulary stay unknown and bump `warnings`.
pub fn normalize_lexicon(raw: &RawObjectRef, warnings: &mut usize) -> ObjectRef {
    let lex = lexicon();
    let color = match &raw.color {
        None => Color::Unknown,
        Some(tok) => lex.lookup_color(tok).unwrap_or_else(|| {
            *warnings += 1;
            Color::Unknown
        }),
    };
    let shape = match &raw.shape {
        None => Shape::Unknown,
        Some(tok) => lex.lookup_shape(tok).unwrap_or_else(|| {
            *warnings += 1;
            Shape::Unknown
        }),
    };
    let material = match &raw.material {
        None => Material::Unknown,
        Some(tok) => lex.lookup_material(tok).unwrap_or_else(|| {
            *warnings += 1;
            Material::Unknown
        }),
    };
    ObjectRef::new(color, shape, material)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabulary_has_27_verbs() {
        assert_eq!(lexicon().verbs().len(), 27);
    }

    #[test]
    fn inflections_resolve_to_lemmas() {
        let lex = lexicon();
        assert_eq!(lex.lookup_verb("collided").unwrap().lemma, "collide");
        assert_eq!(lex.lookup_verb("HITS").unwrap().lemma, "hit");
        assert_eq!(lex.lookup_verb("struck").unwrap().lemma, "strike");
        assert!(lex.lookup_verb("cube").is_none());
    }

    #[test]
    fn aliases_normalize() {
        let mut warnings = 0;
        let raw = RawObjectRef {
            color: Some("gold".into()),
            shape: Some("ball".into()),
            material: None,
        };
        let obj = normalize_lexicon(&raw, &mut warnings);
        assert_eq!(obj.color, Color::Yellow);
        assert_eq!(obj.shape, Shape::Sphere);
        assert_eq!(obj.material, Material::Unknown);
        assert_eq!(warnings, 0);
    }

    #[test]
    fn canonical_terms_pass_through() {
        let mut warnings = 0;
        let raw = RawObjectRef {
            color: Some("red".into()),
            shape: Some("block".into()),
            material: Some("rubber".into()),
        };
        let obj = normalize_lexicon(&raw, &mut warnings);
        assert_eq!(obj.color, Color::Red);
        assert_eq!(obj.shape, Shape::Cube);
        assert_eq!(obj.material, Material::Rubber);
    }

    #[test]
    fn unknown_tokens_counted() {
        let mut warnings = 0;
        let raw = RawObjectRef {
            color: Some("chartreuse".into()),
            shape: Some("dodecahedron".into()),
            material: Some("metal".into()),
        };
        let obj = normalize_lexicon(&raw, &mut warnings);
        assert_eq!(obj.color, Color::Unknown);
        assert_eq!(obj.shape, Shape::Unknown);
        assert_eq!(obj.material, Material::Metal);
        assert_eq!(warnings, 2);
    }
}
