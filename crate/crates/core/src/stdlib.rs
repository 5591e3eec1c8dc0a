//! The bundled background libraries.

use crate::language::{parse, resolve_includes, Document, LanguageError, LibrarySource, SearchPath, Tokens};

pub const SETS: &str = include_str!("../../../lib/sets.elfe");
pub const RELATIONS: &str = include_str!("../../../lib/relations.elfe");
pub const FUNCTIONS: &str = include_str!("../../../lib/functions.elfe");

/// Names of the bundled libraries, in dependency order.
pub const NAMES: [&str; 3] = ["sets", "relations", "functions"];

pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "sets" => Some(SETS),
        "relations" => Some(RELATIONS),
        "functions" => Some(FUNCTIONS),
        _ => None,
    }
}

/// Parses a library and splices in everything it includes.
pub fn load_library(name: &str, search: &SearchPath) -> Result<Document<Tokens>, LanguageError> {
    let text = search.load(name).ok_or_else(|| LanguageError::new(format!("library `{name}` not found"), None))?;
    let doc = parse(&text, name)?;
    resolve_includes(doc, search)
}
