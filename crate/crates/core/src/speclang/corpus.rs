use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use super::ast::ModelDocument;
use super::{check_wellformedness_in, parse_model, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDocument {
    /// File path (or another label) used in findings.
    pub path: String,
    pub doc: ModelDocument,
}

/// A set of documents checked and elaborated together.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<SourceDocument>,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} does not parse: {}", .diagnostics.first().map(|d| d.to_string()).unwrap_or_default())]
    Parse { path: String, diagnostics: Vec<Diagnostic> },
    #[error("import cycle through {0}")]
    ImportCycle(String),
}

impl CorpusError {
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            CorpusError::Parse { diagnostics, .. } => diagnostics.clone(),
            CorpusError::Io { path, .. } => vec![Diagnostic::error("E-IMP-02", None, path.clone(), self.to_string())],
            CorpusError::ImportCycle(path) => {
                vec![Diagnostic::error("E-IMP-01", None, path.clone(), self.to_string())]
            }
        }
    }
}

impl Corpus {
    pub fn single(path: impl Into<String>, doc: ModelDocument) -> Self {
        Corpus {
            documents: vec![SourceDocument { path: path.into(), doc }],
        }
    }

    pub fn from_documents(documents: impl IntoIterator<Item = (String, ModelDocument)>) -> Self {
        Corpus {
            documents: documents
                .into_iter()
                .map(|(path, doc)| SourceDocument { path, doc })
                .collect(),
        }
    }

    /// Parses one in-memory source text as a single-document corpus.
    pub fn parse(path: impl Into<String>, text: &str) -> Result<Self, CorpusError> {
        let path = path.into();
        let report = parse_model(text);
        match report.document {
            Some(doc) => Ok(Corpus::single(path, doc)),
            None => Err(CorpusError::Parse {
                path,
                diagnostics: report.diagnostics,
            }),
        }
    }

    pub fn docs(&self) -> impl Iterator<Item = &ModelDocument> {
        self.documents.iter().map(|d| &d.doc)
    }

    /// Wellformedness findings of every document, each resolved against
    /// the rest of the corpus.
    pub fn wellformedness(&self) -> Vec<(String, Diagnostic)> {
        let mut out = Vec::new();
        for (i, sd) in self.documents.iter().enumerate() {
            let others: Vec<&ModelDocument> = self
                .documents
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, d)| &d.doc)
                .collect();
            for d in check_wellformedness_in(&sd.doc, &others) {
                out.push((sd.path.clone(), d));
            }
        }
        out
    }
}

/// Loads `root` and everything it imports, transitively. Import paths are
/// relative to the importing file.
pub fn load_corpus(root: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::default();
    let mut done = BTreeSet::new();
    load_into(root.as_ref(), &mut Vec::new(), &mut done, &mut corpus)?;
    Ok(corpus)
}

fn load_into(
    path: &Path,
    stack: &mut Vec<PathBuf>,
    done: &mut BTreeSet<PathBuf>,
    corpus: &mut Corpus,
) -> Result<(), CorpusError> {
    let key = path.canonicalize().map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if stack.contains(&key) {
        return Err(CorpusError::ImportCycle(path.display().to_string()));
    }
    if done.contains(&key) {
        return Ok(());
    }
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: label.clone(),
        source,
    })?;
    let report = parse_model(&text);
    let Some(doc) = report.document else {
        return Err(CorpusError::Parse {
            path: label,
            diagnostics: report.diagnostics,
        });
    };
    stack.push(key.clone());
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    for import in &doc.imports {
        load_into(&base.join(import), stack, done, corpus)?;
    }
    stack.pop();
    done.insert(key);
    corpus.documents.push(SourceDocument { path: label, doc });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("fks-corpus-{name}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn imports_resolve_relative_to_importer() {
        let dir = scratch("ok");
        std::fs::create_dir_all(dir.join("lib")).unwrap();
        std::fs::write(dir.join("lib/types.fks"), "datatype Num = int[0..9]\n").unwrap();
        std::fs::write(
            dir.join("main.fks"),
            "import \"lib/types.fks\"\ncomponent C { in In: Num }\n",
        )
        .unwrap();
        let corpus = load_corpus(dir.join("main.fks")).unwrap();
        assert_eq!(corpus.documents.len(), 2);
        assert!(corpus.wellformedness().is_empty());
    }

    #[test]
    fn import_cycles_detected() {
        let dir = scratch("cycle");
        std::fs::write(dir.join("a.fks"), "import \"b.fks\"\n").unwrap();
        std::fs::write(dir.join("b.fks"), "import \"a.fks\"\n").unwrap();
        let err = load_corpus(dir.join("a.fks")).unwrap_err();
        assert!(matches!(err, CorpusError::ImportCycle(_)));
        assert_eq!(err.diagnostics()[0].code, "E-IMP-01");
    }
}
