//! Logical-form templates such as `WHO_ACTS_WITH_IN($ACTOR, $MOVIE)`.
//!
//! An answer is a template when it starts with an uppercase predicate name
//! immediately followed by `(`. Arguments are comma separated and are either
//! placeholders or literals. `$TAG` is filled by the first binding tagged
//! `TAG`, `$TAG2` by the second, and so on.

use std::fmt;

use crate::error::{NluError, Result};
use crate::gazetteer::Binding;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateArg {
    /// `$TAG` or `$TAGk`; `occurrence` is 1-based.
    Placeholder {
        tag: String,
        occurrence: usize,
    },
    Literal(String),
}

impl TemplateArg {
    fn placeholder_name(&self) -> Option<String> {
        match self {
            TemplateArg::Placeholder { tag, occurrence: 1 } => Some(format!("${tag}")),
            TemplateArg::Placeholder { tag, occurrence } => Some(format!("${tag}{occurrence}")),
            TemplateArg::Literal(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub predicate: String,
    pub args: Vec<TemplateArg>,
}

fn is_predicate(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase() || c == '_')
        && chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

fn malformed(template: &str, message: impl Into<String>) -> NluError {
    NluError::Template {
        template: template.to_string(),
        message: message.into(),
    }
}

fn parse_arg(template: &str, raw: &str) -> Result<TemplateArg> {
    let arg = raw.trim();
    if arg.is_empty() {
        return Err(malformed(template, "empty argument"));
    }
    if let Some(name) = arg.strip_prefix('$') {
        let digits_at = name
            .char_indices()
            .find(|(_, c)| c.is_ascii_digit())
            .map_or(name.len(), |(i, _)| i);
        let (tag, digits) = name.split_at(digits_at);
        if tag.is_empty() || !tag.chars().all(|c| c.is_uppercase() || c == '_') {
            return Err(malformed(template, format!("bad placeholder `{arg}`")));
        }
        let occurrence = if digits.is_empty() {
            1
        } else {
            match digits.parse::<usize>() {
                Ok(k) if k >= 1 && digits.chars().all(|c| c.is_ascii_digit()) => k,
                _ => {
                    return Err(malformed(
                        template,
                        format!("bad placeholder index in `{arg}`"),
                    ))
                }
            }
        };
        return Ok(TemplateArg::Placeholder {
            tag: tag.to_string(),
            occurrence,
        });
    }
    if arg.contains(['(', ')', '$']) {
        return Err(malformed(template, format!("bad literal `{arg}`")));
    }
    Ok(TemplateArg::Literal(arg.to_string()))
}

impl Template {
    /// `Ok(None)` for plain text answers, `Err` for text that looks like a
    /// template but does not parse.
    pub fn parse(text: &str) -> Result<Option<Template>> {
        let text = text.trim();
        let Some(open) = text.find('(') else {
            return Ok(None);
        };
        let predicate = &text[..open];
        if !is_predicate(predicate) {
            return Ok(None);
        }
        let Some(inner) = text[open + 1..].strip_suffix(')') else {
            return Err(malformed(text, "missing closing `)`"));
        };
        let args = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|a| parse_arg(text, a))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Some(Template {
            predicate: predicate.to_string(),
            args,
        }))
    }

    /// Fills placeholders from `bindings`, consumed per tag in order.
    pub fn instantiate(&self, bindings: &[Binding]) -> LogicalForm {
        let mut arguments = Vec::with_capacity(self.args.len());
        let mut unresolved = Vec::new();
        for arg in &self.args {
            match arg {
                TemplateArg::Literal(text) => arguments.push(text.clone()),
                TemplateArg::Placeholder { tag, occurrence } => {
                    match bindings
                        .iter()
                        .filter(|b| &b.tag == tag)
                        .nth(occurrence - 1)
                    {
                        Some(b) => arguments.push(b.surface.clone()),
                        None => {
                            unresolved.extend(arg.placeholder_name());
                            arguments.push(tag.clone());
                        }
                    }
                }
            }
        }
        LogicalForm {
            predicate: self.predicate.clone(),
            arguments,
            unresolved,
        }
    }
}

/// An instantiated template, e.g. `WHO_ACTS_WITH_IN(Viggo Mortensen, Senhor dos Anéis)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalForm {
    pub predicate: String,
    pub arguments: Vec<String>,
    /// Placeholders, as written, that had no matching binding.
    pub unresolved: Vec<String>,
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.arguments.join(", "))
    }
}

/// Parses `template` and fills it from `bindings`.
pub fn instantiate_logical_form(template: &str, bindings: &[Binding]) -> Result<LogicalForm> {
    match Template::parse(template)? {
        Some(t) => Ok(t.instantiate(bindings)),
        None => Err(malformed(template, "not a template")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(tag: &str, surface: &str) -> Binding {
        Binding {
            tag: tag.into(),
            surface: surface.into(),
        }
    }

    #[test]
    fn fills_actor_and_movie() {
        let lf = instantiate_logical_form(
            "WHO_ACTS_WITH_IN($ACTOR, $MOVIE)",
            &[
                b("ACTOR", "Viggo Mortensen"),
                b("MOVIE", "Senhor dos Anéis"),
            ],
        )
        .unwrap();
        assert_eq!(
            lf.to_string(),
            "WHO_ACTS_WITH_IN(Viggo Mortensen, Senhor dos Anéis)"
        );
        assert!(lf.unresolved.is_empty());
    }

    #[test]
    fn wrong_category_still_instantiates() {
        let lf =
            instantiate_logical_form("QT_WHO_MAIN_ACT($MOVIE)", &[b("MOVIE", "MOVIE-surface")])
                .unwrap();
        assert_eq!(lf.to_string(), "QT_WHO_MAIN_ACT(MOVIE-surface)");
    }

    #[test]
    fn missing_binding_is_reported() {
        let lf = instantiate_logical_form("F($ACTOR)", &[]).unwrap();
        assert_eq!(lf.to_string(), "F(ACTOR)");
        assert_eq!(lf.unresolved, ["$ACTOR"]);
        assert_eq!(lf.arguments.len(), 1);
    }

    #[test]
    fn repeated_tags_consume_in_order() {
        let binds = [b("ACTOR", "A"), b("MOVIE", "M"), b("ACTOR", "B")];
        let lf = instantiate_logical_form("ACT_TOGETHER($ACTOR, $ACTOR2, $MOVIE, 1999)", &binds)
            .unwrap();
        assert_eq!(lf.to_string(), "ACT_TOGETHER(A, B, M, 1999)");
        let lf = instantiate_logical_form("X($ACTOR3)", &binds).unwrap();
        assert_eq!(lf.unresolved, ["$ACTOR3"]);
    }

    #[test]
    fn plain_text_is_not_a_template() {
        for text in ["Olá!", "Bom dia (manhã)", "Sim", "agent(x)", ""] {
            assert_eq!(Template::parse(text).unwrap(), None, "{text}");
        }
        assert_eq!(Template::parse("NOW()").unwrap().unwrap().args, []);
    }

    #[test]
    fn malformed_templates() {
        for text in [
            "F($ACTOR",
            "F($actor)",
            "F(a,,b)",
            "F($)",
            "F(a(b))",
            "F($ACTOR0)",
            "F(x$y)",
        ] {
            assert!(
                matches!(Template::parse(text), Err(NluError::Template { .. })),
                "{text}"
            );
        }
    }
}
