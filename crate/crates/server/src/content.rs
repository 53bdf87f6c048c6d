//! Localized static documents (FAQ, terms) with front-matter metadata.

use std::collections::HashMap;
use std::path::Path;

use glycotrack_core::domain::Language;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentKind {
    Faq,
    Terms,
}

impl DocumentKind {
    pub const ALL: [DocumentKind; 2] = [DocumentKind::Faq, DocumentKind::Terms];

    pub fn as_str(self) -> &'static str {
        match self {
            DocumentKind::Faq => "faq",
            DocumentKind::Terms => "terms",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.as_str() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Document {
    pub document: DocumentKind,
    pub language: Language,
    pub version: String,
    pub title: String,
    pub body: String,
}

const BUNDLED: &[(DocumentKind, Language, &str)] = &[
    (DocumentKind::Faq, Language::En, include_str!("../content/faq.en.md")),
    (DocumentKind::Faq, Language::Es, include_str!("../content/faq.es.md")),
    (DocumentKind::Terms, Language::En, include_str!("../content/terms.en.md")),
    (DocumentKind::Terms, Language::Es, include_str!("../content/terms.es.md")),
];

/// Every available translation. English must exist for each document.
#[derive(Debug, Clone)]
pub struct ContentLibrary {
    docs: HashMap<(DocumentKind, Language), Document>,
}

impl ContentLibrary {
    pub fn bundled() -> Self {
        let mut docs = HashMap::new();
        for &(kind, lang, text) in BUNDLED {
            let doc = parse(kind, lang, text).expect("bundled documents are well formed");
            docs.insert((kind, lang), doc);
        }
        ContentLibrary { docs }
    }

    /// Loads `{faq,terms}.{en,es}.md` from `dir`. Missing translations are
    /// allowed; a missing English original is an error.
    pub fn from_dir(dir: &Path) -> Result<Self, String> {
        let mut docs = HashMap::new();
        for kind in DocumentKind::ALL {
            for lang in [Language::En, Language::Es] {
                let path = dir.join(format!("{}.{}.md", kind.as_str(), lang.as_str()));
                match std::fs::read_to_string(&path) {
                    Ok(text) => {
                        let doc = parse(kind, lang, &text).map_err(|e| format!("{}: {e}", path.display()))?;
                        docs.insert((kind, lang), doc);
                    }
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound && lang != Language::En => {}
                    Err(e) => return Err(format!("{}: {e}", path.display())),
                }
            }
        }
        Ok(ContentLibrary { docs })
    }

    /// The document in `lang`, or the English original when untranslated.
    pub fn get(&self, kind: DocumentKind, lang: Language) -> &Document {
        self.docs
            .get(&(kind, lang))
            .or_else(|| self.docs.get(&(kind, Language::En)))
            .expect("English original is always present")
    }
}

fn parse(kind: DocumentKind, lang: Language, text: &str) -> Result<Document, String> {
    let rest = text
        .strip_prefix("---\n")
        .ok_or("missing front matter")?;
    let (header, body) = rest.split_once("\n---\n").ok_or("unterminated front matter")?;
    let mut version = None;
    let mut title = None;
    for (i, line) in header.lines().enumerate() {
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| format!("line {}: expected 'key: value'", i + 2))?;
        match key.trim() {
            "version" => version = Some(value.trim().to_string()),
            "title" => title = Some(value.trim().to_string()),
            other => return Err(format!("line {}: unknown key '{other}'", i + 2)),
        }
    }
    let body = body.trim().to_string();
    if body.is_empty() {
        return Err("empty document".into());
    }
    Ok(Document {
        document: kind,
        language: lang,
        version: version.ok_or("missing version")?,
        title: title.ok_or("missing title")?,
        body,
    })
}
