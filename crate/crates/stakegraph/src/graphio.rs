//! Graph interchange: GraphML export/import and DOT export.
//!
//! Edge weights are written as decimals with 12 significant digits. The
//! GraphML form carries enough graph-level attributes (mode, semantics,
//! kind, repository) to round-trip back into an [`InteractionNetwork`];
//! imported weights are the exact rational value of the decimal text. The
//! artifact set survives the round trip; the scope filter does not.

use std::collections::BTreeSet;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::pow::Pow;
use quick_xml::events::{BytesDecl, BytesEnd, BytesStart, BytesText, Event};
use quick_xml::{Reader, Writer};

use crate::event::Kind;
use crate::network::{
    weight_to_decimal, EdgeMode, InteractionNetwork, Provenance, Weight, WeightSemantics,
};
use crate::{Error, Result};

const GRAPHML_NS: &str = "http://graphml.graphdrawing.org/xmlns";

/// Writes the network as GraphML.
pub fn write_graphml<W: Write>(out: W, network: &InteractionNetwork) -> Result<()> {
    let mut writer = Writer::new_with_indent(out, b' ', 2);
    let io = |e: quick_xml::Error| Error::Contract(format!("graphml write failed: {e}"));

    writer
        .write_event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))
        .map_err(io)?;

    let mut root = BytesStart::new("graphml");
    root.push_attribute(("xmlns", GRAPHML_NS));
    writer.write_event(Event::Start(root)).map_err(io)?;

    for (id, target, name) in [
        ("weight", "edge", "weight"),
        ("mode", "graph", "mode"),
        ("semantics", "graph", "weight_semantics"),
        ("kind", "graph", "kind"),
        ("repository", "graph", "repository"),
        ("artifacts", "graph", "artifacts"),
    ] {
        let mut key = BytesStart::new("key");
        key.push_attribute(("id", id));
        key.push_attribute(("for", target));
        key.push_attribute(("attr.name", name));
        key.push_attribute(("attr.type", if id == "weight" { "double" } else { "string" }));
        writer.write_event(Event::Empty(key)).map_err(io)?;
    }

    let mut graph = BytesStart::new("graph");
    graph.push_attribute(("id", network.provenance.repository_id.as_str()));
    graph.push_attribute(("edgedefault", "directed"));
    writer.write_event(Event::Start(graph)).map_err(io)?;

    let data = |writer: &mut Writer<W>, key: &str, value: &str| -> Result<()> {
        let mut el = BytesStart::new("data");
        el.push_attribute(("key", key));
        writer.write_event(Event::Start(el)).map_err(io)?;
        writer
            .write_event(Event::Text(BytesText::new(value)))
            .map_err(io)?;
        writer
            .write_event(Event::End(BytesEnd::new("data")))
            .map_err(io)?;
        Ok(())
    };

    let mode = match network.mode {
        EdgeMode::Weighted => "weighted",
        EdgeMode::Binary => "binary",
    };
    let semantics = match network.weight_semantics {
        WeightSemantics::PerArtifact => "per_artifact",
        WeightSemantics::Pooled => "pooled",
    };
    let artifacts: Vec<&str> = network.artifacts.iter().map(String::as_str).collect();
    data(&mut writer, "mode", mode)?;
    data(&mut writer, "semantics", semantics)?;
    data(&mut writer, "kind", network.kind.as_str())?;
    data(&mut writer, "repository", &network.provenance.repository_id)?;
    data(&mut writer, "artifacts", &artifacts.join(","))?;

    for node in &network.nodes {
        let mut el = BytesStart::new("node");
        el.push_attribute(("id", node.as_str()));
        writer.write_event(Event::Empty(el)).map_err(io)?;
    }

    for ((source, target), weight) in &network.edges {
        let mut el = BytesStart::new("edge");
        el.push_attribute(("source", source.as_str()));
        el.push_attribute(("target", target.as_str()));
        writer.write_event(Event::Start(el)).map_err(io)?;
        data(&mut writer, "weight", &weight_to_decimal(weight))?;
        writer
            .write_event(Event::End(BytesEnd::new("edge")))
            .map_err(io)?;
    }

    writer
        .write_event(Event::End(BytesEnd::new("graph")))
        .map_err(io)?;
    writer
        .write_event(Event::End(BytesEnd::new("graphml")))
        .map_err(io)?;
    Ok(())
}

/// Parses a decimal string into its exact rational value.
pub fn decimal_to_weight(text: &str) -> Result<Weight> {
    let bad = || Error::Contract(format!("bad decimal weight '{text}'"));
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!(
        "{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part
    );
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = BigInt::from(10).pow(frac_part.len() as u32);
    Ok(BigRational::new(numer, denom))
}

/// Reads a GraphML document produced by [`write_graphml`].
pub fn read_graphml(document: &str) -> Result<InteractionNetwork> {
    let mut reader = Reader::from_str(document);
    reader.config_mut().trim_text(true);

    let mut nodes: Vec<String> = Vec::new();
    let mut edges = std::collections::BTreeMap::new();
    let mut mode = None;
    let mut semantics = None;
    let mut kind = None;
    let mut repository = String::new();
    let mut artifacts: BTreeSet<String> = BTreeSet::new();

    let schema = |message: String| Error::Schema {
        path: "<graphml>".into(),
        message,
    };

    // (current edge endpoints, current data key)
    let mut current_edge: Option<(String, String)> = None;
    let mut current_key: Option<String> = None;

    loop {
        match reader.read_event() {
            Err(e) => return Err(schema(e.to_string())),
            Ok(Event::Eof) => break,
            Ok(Event::Start(el)) | Ok(Event::Empty(el)) => {
                let attr = |name: &str| -> Option<String> {
                    el.attributes().flatten().find_map(|a| {
                        (a.key.as_ref() == name.as_bytes())
                            .then(|| String::from_utf8_lossy(&a.value).into_owned())
                    })
                };
                match el.name().as_ref() {
                    b"node" => {
                        nodes.push(attr("id").ok_or_else(|| schema("node without id".into()))?)
                    }
                    b"edge" => {
                        let source =
                            attr("source").ok_or_else(|| schema("edge without source".into()))?;
                        let target =
                            attr("target").ok_or_else(|| schema("edge without target".into()))?;
                        current_edge = Some((source, target));
                    }
                    b"data" => current_key = attr("key"),
                    _ => {}
                }
            }
            Ok(Event::Text(text)) => {
                let value = text
                    .unescape()
                    .map_err(|e| schema(e.to_string()))?
                    .into_owned();
                match current_key.as_deref() {
                    Some("weight") => {
                        let (source, target) = current_edge
                            .clone()
                            .ok_or_else(|| schema("weight outside an edge".into()))?;
                        edges.insert((source, target), decimal_to_weight(&value)?);
                    }
                    Some("mode") => {
                        mode = Some(match value.as_str() {
                            "weighted" => EdgeMode::Weighted,
                            "binary" => EdgeMode::Binary,
                            other => return Err(schema(format!("unknown mode '{other}'"))),
                        })
                    }
                    Some("semantics") => {
                        semantics = Some(match value.as_str() {
                            "per_artifact" => WeightSemantics::PerArtifact,
                            "pooled" => WeightSemantics::Pooled,
                            other => return Err(schema(format!("unknown semantics '{other}'"))),
                        })
                    }
                    Some("kind") => {
                        kind = Some(value.parse::<Kind>().map_err(|e| schema(e.to_string()))?)
                    }
                    Some("repository") => repository = value,
                    Some("artifacts") => {
                        artifacts = value
                            .split(',')
                            .filter(|s| !s.is_empty())
                            .map(String::from)
                            .collect()
                    }
                    _ => {}
                }
            }
            Ok(Event::End(el)) => match el.name().as_ref() {
                b"edge" => current_edge = None,
                b"data" => current_key = None,
                _ => {}
            },
            Ok(_) => {}
        }
    }

    nodes.sort();
    Ok(InteractionNetwork {
        nodes,
        artifacts,
        edges,
        mode: mode.ok_or_else(|| schema("missing graph mode attribute".into()))?,
        weight_semantics: semantics
            .ok_or_else(|| schema("missing graph semantics attribute".into()))?,
        kind: kind.ok_or_else(|| schema("missing graph kind attribute".into()))?,
        provenance: Provenance {
            repository_id: repository,
            scope: Default::default(),
        },
    })
}

/// Writes the network in DOT form (export only).
pub fn write_dot<W: Write>(mut out: W, network: &InteractionNetwork) -> Result<()> {
    let io = |e: std::io::Error| Error::io("<dot>", e);
    writeln!(out, "digraph \"{}\" {{", escape_dot(&network.provenance.repository_id)).map_err(io)?;
    for node in &network.nodes {
        writeln!(out, "  \"{}\";", escape_dot(node)).map_err(io)?;
    }
    for ((source, target), weight) in &network.edges {
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [weight={}];",
            escape_dot(source),
            escape_dot(target),
            weight_to_decimal(weight)
        )
        .map_err(io)?;
    }
    writeln!(out, "}}").map_err(io)?;
    Ok(())
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use std::collections::BTreeMap;

    fn sample_network() -> InteractionNetwork {
        let ratio = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let mut edges = BTreeMap::new();
        edges.insert(("A".to_string(), "B".to_string()), ratio(1, 6));
        edges.insert(("B".to_string(), "A".to_string()), ratio(5, 6));
        InteractionNetwork {
            nodes: vec!["A".into(), "B".into()],
            artifacts: BTreeSet::from(["U-1".to_string()]),
            edges,
            mode: EdgeMode::Weighted,
            weight_semantics: WeightSemantics::PerArtifact,
            kind: Kind::Comment,
            provenance: Provenance {
                repository_id: "repo".into(),
                scope: Default::default(),
            },
        }
    }

    #[test]
    fn graphml_round_trip_preserves_structure() {
        let network = sample_network();
        let mut buf = Vec::new();
        write_graphml(&mut buf, &network).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = read_graphml(&text).unwrap();
        assert_eq!(back.nodes, network.nodes);
        assert_eq!(back.artifacts, network.artifacts);
        assert_eq!(back.mode, network.mode);
        assert_eq!(back.kind, network.kind);
        assert_eq!(
            back.edges.keys().collect::<Vec<_>>(),
            network.edges.keys().collect::<Vec<_>>()
        );
        // Weights survive to 12 significant digits.
        use num_traits::ToPrimitive;
        for (key, w) in &network.edges {
            let got = back.edges[key].to_f64().unwrap();
            assert!((got - w.to_f64().unwrap()).abs() < 1e-11);
        }
    }

    #[test]
    fn graphml_weights_carry_12_significant_digits() {
        let network = sample_network();
        let mut buf = Vec::new();
        write_graphml(&mut buf, &network).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("0.166666666667"), "{text}");
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(
            decimal_to_weight("0.25").unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(4))
        );
        assert_eq!(decimal_to_weight("3").unwrap(), BigRational::from_integer(BigInt::from(3)));
        assert!(decimal_to_weight("abc").is_err());
    }

    #[test]
    fn dot_output_lists_nodes_and_weighted_edges() {
        let mut network = sample_network();
        network
            .edges
            .insert(("A".to_string(), "B\"x".to_string()), Weight::one());
        let mut buf = Vec::new();
        write_dot(&mut buf, &network).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"A\" -> \"B\" [weight=0.166666666667];"));
        assert!(text.contains("\\\"")); // quotes escaped
        assert!(text.starts_with("digraph \"repo\" {"));
    }
}
