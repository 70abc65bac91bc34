//! Prompt templates are data, not code: a directory of text files with
//! `{name}` placeholders, loaded once at startup.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("prompt directory {0} is missing or unreadable: {1}")]
    BadRoot(PathBuf, std::io::Error),
    #[error("prompt template {0:?} not found under {1}")]
    MissingTemplate(String, PathBuf),
    #[error("template {template:?} still contains placeholder {{{placeholder}}} after rendering")]
    MissingPlaceholder { template: String, placeholder: String },
}

/// All templates under a root directory, keyed by relative path without
/// the `.txt` extension (`controllers/router`, `agents/eutils`, ...).
#[derive(Debug, Clone)]
pub struct PromptLibrary {
    root: PathBuf,
    templates: BTreeMap<String, String>,
}

impl PromptLibrary {
    pub fn load(root: impl Into<PathBuf>) -> Result<Self, PromptError> {
        let root = root.into();
        let mut templates = BTreeMap::new();
        collect(&root, &root, &mut templates)?;
        Ok(PromptLibrary { root, templates })
    }

    /// In-memory library for tests.
    pub fn from_entries(entries: &[(&str, &str)]) -> Self {
        PromptLibrary {
            root: PathBuf::from("<memory>"),
            templates: entries
                .iter()
                .map(|(name, text)| (name.to_string(), text.to_string()))
                .collect(),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Result<&str, PromptError> {
        self.templates
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| PromptError::MissingTemplate(name.to_string(), self.root.clone()))
    }

    /// Substitutes `{name}` placeholders. A placeholder left unfilled is
    /// an error naming it; unused variables are fine.
    pub fn render(&self, name: &str, vars: &[(&str, &str)]) -> Result<String, PromptError> {
        let mut text = self.get(name)?.to_string();
        for (var, value) in vars {
            text = text.replace(&format!("{{{var}}}"), value);
        }
        if let Some(placeholder) = first_placeholder(&text) {
            return Err(PromptError::MissingPlaceholder {
                template: name.to_string(),
                placeholder,
            });
        }
        Ok(text)
    }
}

fn collect(
    root: &Path,
    dir: &Path,
    templates: &mut BTreeMap<String, String>,
) -> Result<(), PromptError> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| PromptError::BadRoot(dir.to_path_buf(), e))?;
    for entry in entries {
        let entry = entry.map_err(|e| PromptError::BadRoot(dir.to_path_buf(), e))?;
        let path = entry.path();
        if path.is_dir() {
            collect(root, &path, templates)?;
        } else if path.extension().is_some_and(|ext| ext == "txt") {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| PromptError::BadRoot(path.clone(), e))?;
            let name = path
                .strip_prefix(root)
                .expect("entry lives under root")
                .with_extension("")
                .to_string_lossy()
                .replace('\\', "/");
            templates.insert(name, text);
        }
    }
    Ok(())
}

/// First remaining `{identifier}` placeholder, if any. Identifiers are
/// lowercase names, so JSON braces in template examples do not match.
fn first_placeholder(text: &str) -> Option<String> {
    let bytes = text.as_bytes();
    let mut idx = 0;
    while let Some(open) = text[idx..].find('{') {
        let start = idx + open + 1;
        let mut end = start;
        while end < bytes.len()
            && (bytes[end].is_ascii_lowercase() || bytes[end] == b'_' || bytes[end].is_ascii_digit())
        {
            end += 1;
        }
        if end > start && bytes.get(end) == Some(&b'}') {
            return Some(text[start..end].to_string());
        }
        idx = start;
    }
    None
}
