use std::collections::HashSet;
use std::path::PathBuf;

use super::{parse, Document, Item, ItemKind, LanguageError, Tokens};

/// Where library files come from.
pub trait LibrarySource {
    /// Source text of `<name>.elfe`, or `None` if there is no such library.
    fn load(&self, name: &str) -> Option<String>;
}

/// Directories searched in order, then the libraries bundled with the crate.
#[derive(Debug, Clone, Default)]
pub struct SearchPath {
    pub dirs: Vec<PathBuf>,
    pub bundled: bool,
}

impl SearchPath {
    pub fn new(dirs: Vec<PathBuf>) -> Self {
        SearchPath { dirs, bundled: true }
    }

    pub fn dirs_only(dirs: Vec<PathBuf>) -> Self {
        SearchPath { dirs, bundled: false }
    }
}

impl LibrarySource for SearchPath {
    fn load(&self, name: &str) -> Option<String> {
        if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
            return None;
        }
        for dir in &self.dirs {
            if let Ok(text) = std::fs::read_to_string(dir.join(format!("{name}.elfe"))) {
                return Some(text);
            }
        }
        if self.bundled {
            return crate::stdlib::bundled(name).map(str::to_string);
        }
        None
    }
}

impl<F: Fn(&str) -> Option<String>> LibrarySource for F {
    fn load(&self, name: &str) -> Option<String> {
        self(name)
    }
}

/// Splices included libraries before the including items, depth-first,
/// each library at most once.
pub fn resolve_includes(doc: Document<Tokens>, source: &dyn LibrarySource) -> Result<Document<Tokens>, LanguageError> {
    let mut out = Vec::new();
    let mut done = HashSet::new();
    let mut stack = Vec::new();
    splice(doc, source, &mut done, &mut stack, &mut out)?;
    Ok(Document { items: out })
}

fn splice(
    doc: Document<Tokens>,
    source: &dyn LibrarySource,
    done: &mut HashSet<String>,
    stack: &mut Vec<String>,
    out: &mut Vec<Item<Tokens>>,
) -> Result<(), LanguageError> {
    for item in doc.items {
        if let ItemKind::Include(names) = &item.kind {
            for name in names {
                if let Some(at) = stack.iter().position(|n| n == name) {
                    let mut cycle = stack[at..].to_vec();
                    cycle.push(name.clone());
                    return Err(LanguageError::new(format!("include cycle: {}", cycle.join(" → ")), Some(item.span)).in_file(&item.origin));
                }
                if done.contains(name) {
                    continue;
                }
                let text = source
                    .load(name)
                    .ok_or_else(|| LanguageError::new(format!("library `{name}` not found"), Some(item.span)).in_file(&item.origin))?;
                let lib = parse(&text, name)?;
                stack.push(name.clone());
                splice(lib, source, done, stack, out)?;
                stack.pop();
                done.insert(name.clone());
            }
        }
        out.push(item);
    }
    Ok(())
}
