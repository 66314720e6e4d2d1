//! The place/transition core of PNML.
//!
//! Places, transitions and arcs are collected from the first `<net>`
//! element, including those nested in `<page>` elements. Graphics and
//! tool-specific data are skipped. Initial markings are reported as
//! warnings and otherwise ignored: the number of instances is chosen when
//! checking.

use roxmltree::{Document, Node as XmlNode};

use crate::io::{NetDocument, ParseError};
use crate::petri::{NetBuilder, Tokens};

struct Ctx<'a> {
    doc: &'a Document<'a>,
}

impl Ctx<'_> {
    fn err(&self, node: XmlNode<'_, '_>, message: impl Into<String>) -> ParseError {
        let pos = self.doc.text_pos_at(node.range().start);
        ParseError::new(pos.row as usize, pos.col as usize, message)
    }
}

fn child<'a, 'i>(node: XmlNode<'a, 'i>, name: &str) -> Option<XmlNode<'a, 'i>> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == name)
}

/// Text of `<name><text>...</text></name>`-style labels.
fn label_text<'a, 'i>(node: XmlNode<'a, 'i>, label: &str) -> Option<(XmlNode<'a, 'i>, &'a str)> {
    let l = child(node, label)?;
    let t = child(l, "text")?;
    Some((t, t.text().unwrap_or("").trim()))
}

fn required_id<'a>(ctx: &Ctx<'_>, node: XmlNode<'a, '_>) -> Result<&'a str, ParseError> {
    node.attribute("id").ok_or_else(|| {
        ctx.err(
            node,
            format!("<{}> without an id attribute", node.tag_name().name()),
        )
    })
}

/// Parses a PNML document holding a place/transition net.
pub fn parse_pnml(text: &str) -> Result<NetDocument, ParseError> {
    let doc = Document::parse(text).map_err(|e| {
        let pos = e.pos();
        ParseError::new(pos.row as usize, pos.col as usize, format!("malformed XML: {e}"))
    })?;
    let ctx = Ctx { doc: &doc };
    let root = doc.root_element();
    let net_el = if root.tag_name().name() == "net" {
        root
    } else {
        child(root, "net").ok_or_else(|| ctx.err(root, "no <net> element"))?
    };
    if let Some(ty) = net_el.attribute("type") {
        if !ty.trim_end_matches('/').ends_with("ptnet") {
            return Err(ctx.err(net_el, format!("net type `{ty}` is not a place/transition net")));
        }
    }

    let mut places = Vec::new();
    let mut transitions = Vec::new();
    let mut arcs = Vec::new();
    collect(net_el, &mut places, &mut transitions, &mut arcs);

    let mut builder = NetBuilder::new();
    let mut out_lines = std::collections::HashMap::new();
    let mut warnings = Vec::new();
    let pos_of = |n: XmlNode<'_, '_>| doc.text_pos_at(n.range().start);

    for &p in &places {
        let id = required_id(&ctx, p)?;
        builder.add_place(id).map_err(|e| ctx.err(p, e.to_string()))?;
        out_lines.insert(id.to_string(), pos_of(p).row as usize);
        if let Some((t, value)) = label_text(p, "initialMarking") {
            let tokens: Tokens = value
                .parse()
                .map_err(|_| ctx.err(t, format!("invalid initial marking `{value}`")))?;
            if tokens > 0 {
                warnings.push(format!(
                    "initial marking of place `{id}` ({tokens}) ignored; the instance count is set when checking"
                ));
            }
        }
    }
    for &t in &transitions {
        let id = required_id(&ctx, t)?;
        builder
            .add_transition(id)
            .map_err(|e| ctx.err(t, e.to_string()))?;
        out_lines.insert(id.to_string(), pos_of(t).row as usize);
    }
    for &a in &arcs {
        let source = a
            .attribute("source")
            .ok_or_else(|| ctx.err(a, "<arc> without a source attribute"))?;
        let target = a
            .attribute("target")
            .ok_or_else(|| ctx.err(a, "<arc> without a target attribute"))?;
        let weight = match label_text(a, "inscription") {
            Some((t, value)) => match value.parse::<i64>() {
                Ok(w) if w >= 1 && w <= i64::from(Tokens::MAX) => w as Tokens,
                Ok(_) => return Err(ctx.err(t, format!("arc weight must be at least 1, found {value}"))),
                Err(_) => return Err(ctx.err(t, format!("invalid arc inscription `{value}`"))),
            },
            None => 1,
        };
        let from = builder.node(source).map_err(|e| ctx.err(a, e.to_string()))?;
        let to = builder.node(target).map_err(|e| ctx.err(a, e.to_string()))?;
        builder
            .add_arc_between(from, to, weight)
            .map_err(|e| ctx.err(a, e.to_string()))?;
    }

    let mut out = NetDocument::new(builder.build());
    out.name = net_el
        .attribute("id")
        .map(str::to_string)
        .or_else(|| label_text(net_el, "name").map(|(_, s)| s.to_string()));
    out.lines = out_lines;
    out.warnings = warnings;
    Ok(out)
}

fn collect<'a, 'i>(
    node: XmlNode<'a, 'i>,
    places: &mut Vec<XmlNode<'a, 'i>>,
    transitions: &mut Vec<XmlNode<'a, 'i>>,
    arcs: &mut Vec<XmlNode<'a, 'i>>,
) {
    for c in node.children().filter(|c| c.is_element()) {
        match c.tag_name().name() {
            "place" => places.push(c),
            "transition" => transitions.push(c),
            "arc" => arcs.push(c),
            "page" => collect(c, places, transitions, arcs),
            _ => {}
        }
    }
}
