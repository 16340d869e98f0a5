//! Minimal PLY reader: ASCII and binary little-endian, triangle faces only.

use std::path::Path;

use crate::error::{Error, Result};

use super::{Point3, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ascii,
    BinaryLe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, Scalar::F32 | Scalar::F64)
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

/// Reads a mesh from a PLY file.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    let mesh = parse_ply(&bytes)?;
    log::info!(
        "loaded {}: {} vertices, {} faces",
        path.display(),
        mesh.vertex_count(),
        mesh.face_count()
    );
    Ok(mesh)
}

/// Parses PLY bytes into a cleaned [`TriangleMesh`].
pub fn parse_ply(bytes: &[u8]) -> Result<TriangleMesh> {
    let (format, elements, body_start) = parse_header(bytes)?;
    let mut reader: Box<dyn BodyReader> = match format {
        Format::Ascii => Box::new(AsciiReader { bytes, pos: body_start }),
        Format::BinaryLe => Box::new(BinaryReader { bytes, pos: body_start }),
    };

    let mut vertices: Vec<Point3> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut saw_vertex = false;
    let mut saw_face = false;

    for element in &elements {
        match element.name.as_str() {
            "vertex" => {
                saw_vertex = true;
                let slot = |axis: &str| {
                    element
                        .properties
                        .iter()
                        .position(|p| matches!(p, Property::Scalar { name, .. } if name == axis))
                };
                let (Some(ix), Some(iy), Some(iz)) = (slot("x"), slot("y"), slot("z")) else {
                    return Err(format_err(body_start, "vertex element lacks x/y/z properties"));
                };
                vertices.reserve(element.count);
                let mut xyz = [0.0; 3];
                for _ in 0..element.count {
                    for (k, prop) in element.properties.iter().enumerate() {
                        let value = match prop {
                            Property::Scalar { ty, .. } => reader.scalar(*ty)?,
                            Property::List { count, item, .. } => {
                                let n = reader.count(*count)?;
                                for _ in 0..n {
                                    reader.scalar(*item)?;
                                }
                                continue;
                            }
                        };
                        if k == ix {
                            xyz[0] = value;
                        } else if k == iy {
                            xyz[1] = value;
                        } else if k == iz {
                            xyz[2] = value;
                        }
                    }
                    vertices.push(Point3::new(xyz[0], xyz[1], xyz[2]));
                }
            }
            "face" => {
                saw_face = true;
                let list = element.properties.iter().position(
                    |p| matches!(p, Property::List { name, .. } if name == "vertex_indices" || name == "vertex_index"),
                );
                let Some(list) = list else {
                    return Err(format_err(body_start, "face element lacks a vertex_indices list"));
                };
                faces.reserve(element.count);
                for _ in 0..element.count {
                    let mut tri = None;
                    for (k, prop) in element.properties.iter().enumerate() {
                        match prop {
                            Property::Scalar { ty, .. } => {
                                reader.scalar(*ty)?;
                            }
                            Property::List { count, item, .. } => {
                                let at = reader.offset();
                                let n = reader.count(*count)?;
                                if k == list && n != 3 {
                                    return Err(format_err(
                                        at,
                                        format!("face with {n} vertices; only triangles are supported"),
                                    ));
                                }
                                let mut idx = [0u32; 3];
                                let mut slots = idx.iter_mut();
                                for _ in 0..n {
                                    let at = reader.offset();
                                    let v = reader.scalar(*item)?;
                                    if k == list {
                                        if v < 0.0 || v > u32::MAX as f64 {
                                            return Err(format_err(at, format!("vertex index {v} out of range")));
                                        }
                                        if let Some(slot) = slots.next() {
                                            *slot = v as u32;
                                        }
                                    }
                                }
                                if k == list {
                                    tri = Some(idx);
                                }
                            }
                        }
                    }
                    faces.push(tri.expect("list property located above"));
                }
            }
            _ => {
                for _ in 0..element.count {
                    for prop in &element.properties {
                        match prop {
                            Property::Scalar { ty, .. } => {
                                reader.scalar(*ty)?;
                            }
                            Property::List { count, item, .. } => {
                                let n = reader.count(*count)?;
                                for _ in 0..n {
                                    reader.scalar(*item)?;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    if !saw_vertex || !saw_face || vertices.is_empty() || faces.is_empty() {
        return Err(Error::invalid("PLY file has no vertices or no faces"));
    }
    let (mesh, dropped) = TriangleMesh::with_report(vertices, faces)?;
    if dropped > 0 {
        log::debug!("dropped {dropped} degenerate faces");
    }
    Ok(mesh)
}

fn parse_header(bytes: &[u8]) -> Result<(Format, Vec<Element>, usize)> {
    let mut pos = 0usize;
    let next_line = |pos: &mut usize| -> Result<(usize, String)> {
        let start = *pos;
        let rest = &bytes[start..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| format_err(bytes.len(), "unterminated header"))?;
        *pos = start + end + 1;
        let line = std::str::from_utf8(&rest[..end]).map_err(|_| format_err(start, "header is not valid UTF-8"))?;
        Ok((start, line.trim_end_matches('\r').trim().to_owned()))
    };

    let (_, magic) = next_line(&mut pos)?;
    if magic != "ply" {
        return Err(format_err(0, "missing 'ply' magic"));
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let (at, line) = next_line(&mut pos)?;
        let mut words = line.split_whitespace();
        match words.next() {
            Some("format") => {
                format = Some(match (words.next(), words.next()) {
                    (Some("ascii"), Some("1.0")) => Format::Ascii,
                    (Some("binary_little_endian"), Some("1.0")) => Format::BinaryLe,
                    (Some(other), _) => return Err(format_err(at, format!("unsupported format '{other}'"))),
                    _ => return Err(format_err(at, "malformed format line")),
                });
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = words.next().ok_or_else(|| format_err(at, "element without a name"))?;
                let count = words
                    .next()
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| format_err(at, "element without a valid count"))?;
                elements.push(Element {
                    name: name.to_owned(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| format_err(at, "property before any element"))?;
                let words: Vec<&str> = words.collect();
                let bad_type = |t: &str| format_err(at, format!("unknown property type '{t}'"));
                let prop = match words.as_slice() {
                    ["list", count, item, name] => {
                        let count = Scalar::parse(count).ok_or_else(|| bad_type(count))?;
                        let item = Scalar::parse(item).ok_or_else(|| bad_type(item))?;
                        if !count.is_integer() {
                            return Err(format_err(at, "list count type must be an integer"));
                        }
                        Property::List {
                            name: (*name).to_owned(),
                            count,
                            item,
                        }
                    }
                    [ty, name] => {
                        let ty = Scalar::parse(ty).ok_or_else(|| bad_type(ty))?;
                        Property::Scalar {
                            name: (*name).to_owned(),
                            ty,
                        }
                    }
                    _ => return Err(format_err(at, "malformed property line")),
                };
                element.properties.push(prop);
            }
            Some("end_header") => break,
            Some(other) => return Err(format_err(at, format!("unexpected header keyword '{other}'"))),
        }
    }
    let format = format.ok_or_else(|| format_err(pos, "header has no format line"))?;
    Ok((format, elements, pos))
}

trait BodyReader {
    fn offset(&self) -> usize;
    fn scalar(&mut self, ty: Scalar) -> Result<f64>;

    fn count(&mut self, ty: Scalar) -> Result<usize> {
        let at = self.offset();
        let v = self.scalar(ty)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(format_err(at, format!("invalid list length {v}")));
        }
        Ok(v as usize)
    }
}

struct AsciiReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl BodyReader for AsciiReader<'_> {
    fn offset(&self) -> usize {
        self.pos
    }

    fn scalar(&mut self, ty: Scalar) -> Result<f64> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format_err(start, "unexpected end of data"));
        }
        let token =
            std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| format_err(start, "non-UTF-8 token"))?;
        let value = if ty.is_integer() {
            token.parse::<i64>().map(|v| v as f64).ok()
        } else {
            token.parse::<f64>().ok()
        };
        value.ok_or_else(|| format_err(start, format!("cannot parse '{token}' as {ty:?}")))
    }
}

struct BinaryReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl BodyReader for BinaryReader<'_> {
    fn offset(&self) -> usize {
        self.pos
    }

    fn scalar(&mut self, ty: Scalar) -> Result<f64> {
        let n = ty.size();
        let Some(raw) = self.bytes.get(self.pos..self.pos + n) else {
            return Err(format_err(self.pos, "unexpected end of data"));
        };
        self.pos += n;
        let mut buf = [0u8; 8];
        buf[..n].copy_from_slice(raw);
        Ok(match ty {
            Scalar::I8 => raw[0] as i8 as f64,
            Scalar::U8 => raw[0] as f64,
            Scalar::I16 => i16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(buf),
        })
    }
}
