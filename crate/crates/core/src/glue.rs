//! Glue documents: the XML form of Require/Accept macros.
//!
//! ```xml
//! <glue>
//!   <port type="C" name="p">
//!     <require>
//!       <option motif="star" mode="exact">
//!         <part type="S" name="q" count="1"/>
//!       </option>
//!     </require>
//!     <accept>
//!       <part type="S" name="q"/>
//!     </accept>
//!   </port>
//! </glue>
//! ```
//!
//! A DASH require or accept is written as `none="true"` on the element.
//! Ports are sorted by (component, port) and options by motif id.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use thiserror::Error;

use crate::macros::{Accept, Macros, RequireMode, RequireOption};
use crate::model::PortTypeRef;

#[derive(Debug, Error)]
pub enum GlueError {
    #[error("malformed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("invalid glue document: {0}")]
    Schema(String),
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn part(out: &mut String, indent: &str, t: &PortTypeRef, count: Option<u32>) {
    let _ = write!(out, "{indent}<part type=\"{}\" name=\"{}\"", escape(&t.component), escape(&t.port));
    if let Some(c) = count {
        let _ = write!(out, " count=\"{c}\"");
    }
    out.push_str("/>\n");
}

pub fn emit_glue(macros: &Macros) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<glue>\n");
    for port in macros.port_types() {
        let _ = writeln!(out, "  <port type=\"{}\" name=\"{}\">", escape(&port.component), escape(&port.port));

        let options = macros.require.get(&port).map(Vec::as_slice).unwrap_or(&[]);
        let dash = options.contains(&RequireOption::Dash);
        let mut sorted: Vec<_> = options
            .iter()
            .filter_map(|o| match o {
                RequireOption::Ports { motif, mode, counts } => Some((motif, mode, counts)),
                RequireOption::Dash => None,
            })
            .collect();
        sorted.sort();
        let none = if dash { " none=\"true\"" } else { "" };
        if sorted.is_empty() {
            let _ = writeln!(out, "    <require{none}/>");
        } else {
            let _ = writeln!(out, "    <require{none}>");
            for (motif, mode, counts) in sorted {
                let _ = writeln!(out, "      <option motif=\"{}\" mode=\"{}\">", escape(motif), mode.as_str());
                for (t, &c) in counts {
                    part(&mut out, "        ", t, Some(c));
                }
                out.push_str("      </option>\n");
            }
            out.push_str("    </require>\n");
        }

        match macros.accept.get(&port) {
            Some(Accept::Ports(set)) if !set.is_empty() => {
                out.push_str("    <accept>\n");
                for t in set {
                    part(&mut out, "      ", t, None);
                }
                out.push_str("    </accept>\n");
            }
            Some(Accept::Ports(_)) => out.push_str("    <accept/>\n"),
            Some(Accept::Dash) | None => out.push_str("    <accept none=\"true\"/>\n"),
        }
        out.push_str("  </port>\n");
    }
    out.push_str("</glue>\n");
    out
}

fn schema(msg: impl Into<String>) -> GlueError {
    GlueError::Schema(msg.into())
}

fn attr<'a>(node: roxmltree::Node<'a, '_>, name: &str) -> Result<&'a str, GlueError> {
    node.attribute(name).ok_or_else(|| schema(format!("<{}> is missing attribute '{name}'", node.tag_name().name())))
}

fn port_ref(node: roxmltree::Node) -> Result<PortTypeRef, GlueError> {
    Ok(PortTypeRef::new(attr(node, "type")?, attr(node, "name")?))
}

fn is_none(node: roxmltree::Node) -> Result<bool, GlueError> {
    match node.attribute("none") {
        None | Some("false") => Ok(false),
        Some("true") => Ok(true),
        Some(v) => Err(schema(format!("attribute none=\"{v}\" must be \"true\" or \"false\""))),
    }
}

fn elements<'a, 'i>(node: roxmltree::Node<'a, 'i>, tag: &'static str) -> impl Iterator<Item = roxmltree::Node<'a, 'i>> {
    node.children().filter(move |c| c.is_element() && c.tag_name().name() == tag)
}

/// Reads a glue document back into macros.
pub fn parse_glue(text: &str) -> Result<Macros, GlueError> {
    let doc = roxmltree::Document::parse(text)?;
    let root = doc.root_element();
    if root.tag_name().name() != "glue" {
        return Err(schema("root element must be <glue>"));
    }
    let mut macros = Macros::default();
    for child in root.children().filter(|c| c.is_element()) {
        if child.tag_name().name() != "port" {
            return Err(schema(format!("unexpected element <{}>", child.tag_name().name())));
        }
        let port = port_ref(child)?;
        let require =
            elements(child, "require").next().ok_or_else(|| schema(format!("port {port} has no <require>")))?;
        let accept = elements(child, "accept").next().ok_or_else(|| schema(format!("port {port} has no <accept>")))?;

        if is_none(require)? {
            macros.add_require(port.clone(), RequireOption::Dash);
        }
        for option in elements(require, "option") {
            let mode = match attr(option, "mode")? {
                "exact" => RequireMode::Exact,
                "atLeast" => RequireMode::AtLeast,
                other => return Err(schema(format!("unknown option mode '{other}'"))),
            };
            let mut counts = BTreeMap::new();
            for p in elements(option, "part") {
                let count: u32 =
                    attr(p, "count")?.parse().map_err(|_| schema(format!("bad count on part of port {port}")))?;
                counts.insert(port_ref(p)?, count);
            }
            macros.add_require(
                port.clone(),
                RequireOption::Ports { motif: attr(option, "motif")?.to_string(), mode, counts },
            );
        }
        macros.require.entry(port.clone()).or_default();

        let accept = if is_none(accept)? {
            Accept::Dash
        } else {
            Accept::Ports(elements(accept, "part").map(port_ref).collect::<Result<BTreeSet<_>, _>>()?)
        };
        macros.accept.insert(port, accept);
    }
    Ok(macros)
}
