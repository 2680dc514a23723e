//! Minimal element tree on top of quick-xml events.

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::XmileError;

#[derive(Debug, Clone)]
pub(crate) struct Element {
    pub prefix: Option<String>,
    pub local: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Element>,
    pub text: String,
    pub offset: usize,
}

impl Element {
    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn child(&self, local: &str) -> Option<&Element> {
        self.children.iter().find(|c| c.prefix.is_none() && c.local == local)
    }

    pub fn child_text(&self, local: &str) -> Option<String> {
        self.child(local).map(|c| c.text.trim().to_string())
    }

    pub fn qualified_name(&self) -> String {
        match &self.prefix {
            Some(p) => format!("{p}:{}", self.local),
            None => self.local.clone(),
        }
    }
}

fn malformed(offset: u64, message: impl Into<String>) -> XmileError {
    XmileError::MalformedXml {
        offset: offset as usize,
        message: message.into(),
    }
}

/// Decodes the raw document. UTF-8 (with or without BOM) and UTF-16 (BOM or
/// `<` sniffing) are accepted.
pub(crate) fn decode(bytes: &[u8]) -> Result<String, XmileError> {
    let utf16 = |little: bool, body: &[u8]| -> Result<String, XmileError> {
        if !body.len().is_multiple_of(2) {
            return Err(malformed(body.len() as u64, "truncated UTF-16 input"));
        }
        let units: Vec<u16> = body
            .chunks_exact(2)
            .map(|c| if little { u16::from_le_bytes([c[0], c[1]]) } else { u16::from_be_bytes([c[0], c[1]]) })
            .collect();
        String::from_utf16(&units).map_err(|_| malformed(0, "invalid UTF-16 input"))
    };
    match bytes {
        [0xEF, 0xBB, 0xBF, rest @ ..] => utf8(rest),
        [0xFF, 0xFE, rest @ ..] => utf16(true, rest),
        [0xFE, 0xFF, rest @ ..] => utf16(false, rest),
        [b'<', 0, ..] => utf16(true, bytes),
        [0, b'<', ..] => utf16(false, bytes),
        _ => utf8(bytes),
    }
}

fn utf8(bytes: &[u8]) -> Result<String, XmileError> {
    std::str::from_utf8(bytes)
        .map(str::to_string)
        .map_err(|e| malformed(e.valid_up_to() as u64, "invalid UTF-8"))
}

fn open(start: &BytesStart, offset: u64) -> Result<Element, XmileError> {
    let name = start.name();
    let local = String::from_utf8_lossy(name.local_name().as_ref()).into_owned();
    let prefix = name.prefix().map(|p| String::from_utf8_lossy(p.as_ref()).into_owned());
    let mut attrs = Vec::new();
    for attr in start.attributes() {
        let attr = attr.map_err(|e| malformed(offset, e.to_string()))?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| malformed(offset, e.to_string()))?
            .into_owned();
        attrs.push((key, value));
    }
    Ok(Element {
        prefix,
        local,
        attrs,
        children: Vec::new(),
        text: String::new(),
        offset: offset as usize,
    })
}

/// Parses `text` into its root element.
pub(crate) fn parse_tree(text: &str) -> Result<Element, XmileError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().check_end_names = true;
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    loop {
        let offset = reader.buffer_position();
        let event = reader
            .read_event()
            .map_err(|e| malformed(reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(start) => {
                if root.is_some() {
                    return Err(malformed(offset, "content after the root element"));
                }
                stack.push(open(&start, offset)?);
            }
            Event::Empty(start) => {
                if root.is_some() {
                    return Err(malformed(offset, "content after the root element"));
                }
                let el = open(&start, offset)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => root = Some(el),
                }
            }
            Event::End(_) => {
                let el = stack.pop().ok_or_else(|| malformed(offset, "unexpected end tag"))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                let s = t.unescape().map_err(|e| malformed(offset, e.to_string()))?;
                match stack.last_mut() {
                    Some(top) => top.text.push_str(&s),
                    None if s.trim().is_empty() => {}
                    None => return Err(malformed(offset, "text outside the root element")),
                }
            }
            Event::CData(c) => {
                let s = String::from_utf8_lossy(&c.into_inner()).into_owned();
                match stack.last_mut() {
                    Some(top) => top.text.push_str(&s),
                    None => return Err(malformed(offset, "CDATA outside the root element")),
                }
            }
            Event::Eof => break,
            Event::Decl(_) | Event::PI(_) | Event::Comment(_) | Event::DocType(_) => {}
        }
    }
    if let Some(open) = stack.last() {
        return Err(malformed(text.len() as u64, format!("unclosed element <{}>", open.qualified_name())));
    }
    root.ok_or_else(|| malformed(0, "document has no root element"))
}
