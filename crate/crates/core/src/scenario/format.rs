//! Sections of `key = value` lines.

use super::ScenarioError;

#[derive(Debug, Clone)]
pub(crate) struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

/// Keys that may repeat within a section.
const REPEATABLE: &[&str] = &["point"];

pub(crate) fn parse_document(text: &str) -> Result<Vec<Section>, ScenarioError> {
    let mut sections = vec![Section {
        name: String::new(),
        line: 0,
        entries: Vec::new(),
    }];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ScenarioError::Syntax {
                line,
                message: "section header must end with ']'".into(),
            })?;
            let name = name.trim().to_string();
            if sections.iter().any(|s| s.name == name) {
                return Err(ScenarioError::Syntax {
                    line,
                    message: format!("section [{name}] appears twice"),
                });
            }
            sections.push(Section {
                name,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ScenarioError::Syntax {
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(ScenarioError::Syntax {
                line,
                message: "empty key".into(),
            });
        }
        let section = sections.last_mut().expect("root section");
        if !REPEATABLE.contains(&key.as_str()) {
            if let Some(prev) = section.entries.iter().find(|e| e.key == key) {
                return Err(ScenarioError::Syntax {
                    line,
                    message: format!("key `{key}` already set on line {}", prev.line),
                });
            }
        }
        section.entries.push(Entry {
            key,
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(sections)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let doc = parse_document("name = a # trailing\n\n[curve]\n# note\nkappa = 1\npoint = 1\npoint = 2\n").unwrap();
        assert_eq!(doc.len(), 2);
        assert_eq!(doc[0].entries[0].value, "a");
        assert_eq!(doc[1].name, "curve");
        assert_eq!(doc[1].entries.len(), 3);
        assert_eq!(doc[1].entries[0].line, 5);
    }

    #[test]
    fn duplicates_are_rejected() {
        assert!(matches!(
            parse_document("[a]\nk = 1\nk = 2\n"),
            Err(ScenarioError::Syntax { line: 3, .. })
        ));
        assert!(parse_document("[a]\n[a]\n").is_err());
        assert!(matches!(
            parse_document("[a\n"),
            Err(ScenarioError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_document("junk\n"),
            Err(ScenarioError::Syntax { line: 1, .. })
        ));
    }
}
