//! The `LINK v1` text format.
//!
//! ```text
//! LINK v1
//! component K1
//! v 0 0 0
//! v 1 0 0
//! v 0 1 0
//! transform
//! r 1 0 0
//! r 0 1 0
//! r 0 0 1
//! t 0 0 0
//! s 1
//! ```
//!
//! Vertices are stored as they are; a `transform` block only records how
//! they were obtained from an input. Blank lines and `#` comments are
//! skipped. Numbers are written with 17 significant digits so parsing
//! recovers them exactly.

use std::fmt::Write;

use crate::geom::{Mat3, SimilarityTransform, Vec3};
use crate::knot::PolygonalKnot;

use super::IoError;

pub const HEADER: &str = "LINK v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: String,
    pub knot: PolygonalKnot<f64>,
    pub transform: Option<SimilarityTransform<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkFile {
    pub components: Vec<Component>,
}

impl LinkFile {
    /// Components named `K1`, `K2`, ... without transforms.
    pub fn from_knots(knots: &[PolygonalKnot<f64>]) -> Self {
        let components = knots
            .iter()
            .enumerate()
            .map(|(i, k)| Component {
                name: format!("K{}", i + 1),
                knot: k.clone(),
                transform: None,
            })
            .collect();
        Self { components }
    }

    pub fn knots(&self) -> Vec<PolygonalKnot<f64>> {
        self.components.iter().map(|c| c.knot.clone()).collect()
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn triple(out: &mut String, tag: &str, v: [f64; 3]) {
    writeln!(out, "{tag} {} {} {}", num(v[0]), num(v[1]), num(v[2])).expect("writing to a String");
}

pub fn write_link(file: &LinkFile) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for c in &file.components {
        writeln!(out, "component {}", c.name).expect("writing to a String");
        for p in c.knot.vertices() {
            triple(&mut out, "v", p.to_f64());
        }
        if let Some(t) = &c.transform {
            out.push_str("transform\n");
            for r in 0..3 {
                triple(
                    &mut out,
                    "r",
                    [
                        t.rotation.get(r, 0),
                        t.rotation.get(r, 1),
                        t.rotation.get(r, 2),
                    ],
                );
            }
            triple(&mut out, "t", t.translation.to_f64());
            writeln!(out, "s {}", num(t.scale)).expect("writing to a String");
        }
    }
    out
}

struct Pending {
    name: String,
    line: usize,
    vertices: Vec<Vec3<f64>>,
    transform: Option<SimilarityTransform<f64>>,
}

impl Pending {
    fn finish(self) -> Result<Component, IoError> {
        let knot = PolygonalKnot::new(self.vertices).map_err(|source| IoError::Validation {
            component: self.name.clone(),
            line: self.line,
            source,
        })?;
        Ok(Component {
            name: self.name,
            knot,
            transform: self.transform,
        })
    }
}

fn numbers<const N: usize>(fields: &[&str], line: usize) -> Result<[f64; N], IoError> {
    if fields.len() != N {
        return Err(IoError::Parse {
            line,
            msg: format!("expected {N} numbers, found {}", fields.len()),
        });
    }
    let mut out = [0.0f64; N];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = f.parse().map_err(|_| IoError::Parse {
            line,
            msg: format!("bad number {f:?}"),
        })?;
        if !o.is_finite() {
            return Err(IoError::Parse {
                line,
                msg: format!("non-finite number {f:?}"),
            });
        }
    }
    Ok(out)
}

pub fn parse_link(text: &str) -> Result<LinkFile, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((line, other)) => {
            return Err(IoError::Parse {
                line,
                msg: format!("expected {HEADER:?}, found {other:?}"),
            })
        }
        None => {
            return Err(IoError::Parse {
                line: 1,
                msg: format!("missing {HEADER:?} header"),
            })
        }
    }
    let mut done = Vec::new();
    let mut current: Option<Pending> = None;
    let mut rows: Vec<[f64; 3]> = Vec::new();
    let mut translation: Option<[f64; 3]> = None;
    let mut in_transform = false;
    let lines: Vec<(usize, &str)> = lines.collect();
    for &(line, text) in &lines {
        let mut fields = text.split_whitespace();
        let tag = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();
        let need_component = || IoError::Parse {
            line,
            msg: format!("{tag:?} outside a component"),
        };
        match tag {
            "component" => {
                if in_transform {
                    return Err(IoError::Parse {
                        line,
                        msg: "unfinished transform block".into(),
                    });
                }
                if rest.len() != 1 {
                    return Err(IoError::Parse {
                        line,
                        msg: "component needs exactly one name".into(),
                    });
                }
                if let Some(p) = current.take() {
                    done.push(p.finish()?);
                }
                if done.iter().any(|c: &Component| c.name == rest[0]) {
                    return Err(IoError::Parse {
                        line,
                        msg: format!("duplicate component {:?}", rest[0]),
                    });
                }
                current = Some(Pending {
                    name: rest[0].to_string(),
                    line,
                    vertices: Vec::new(),
                    transform: None,
                });
            }
            "v" => {
                let p = current.as_mut().ok_or_else(need_component)?;
                if in_transform || p.transform.is_some() {
                    return Err(IoError::Parse {
                        line,
                        msg: "vertex after transform block".into(),
                    });
                }
                let [x, y, z] = numbers::<3>(&rest, line)?;
                p.vertices.push(Vec3::new(x, y, z));
            }
            "transform" => {
                let p = current.as_ref().ok_or_else(need_component)?;
                if in_transform || p.transform.is_some() || !rest.is_empty() {
                    return Err(IoError::Parse {
                        line,
                        msg: "unexpected transform block".into(),
                    });
                }
                in_transform = true;
                rows.clear();
                translation = None;
            }
            "r" if in_transform && rows.len() < 3 && translation.is_none() => {
                rows.push(numbers::<3>(&rest, line)?)
            }
            "t" if in_transform && rows.len() == 3 && translation.is_none() => {
                translation = Some(numbers::<3>(&rest, line)?)
            }
            "s" if in_transform && translation.is_some() => {
                let [s] = numbers::<1>(&rest, line)?;
                if s <= 0.0 {
                    return Err(IoError::Parse {
                        line,
                        msg: "scale must be positive".into(),
                    });
                }
                let [a, b, c] = rows.as_slice() else {
                    unreachable!("three rows checked above")
                };
                let rotation = Mat3::from_rows(
                    Vec3::new(a[0], a[1], a[2]),
                    Vec3::new(b[0], b[1], b[2]),
                    Vec3::new(c[0], c[1], c[2]),
                );
                let [x, y, z] = translation.take().expect("checked above");
                let t = SimilarityTransform {
                    rotation,
                    translation: Vec3::new(x, y, z),
                    scale: s,
                };
                current.as_mut().ok_or_else(need_component)?.transform = Some(t);
                in_transform = false;
            }
            "r" | "t" | "s" => {
                return Err(IoError::Parse {
                    line,
                    msg: format!("misplaced {tag:?} line"),
                })
            }
            _ => {
                return Err(IoError::Parse {
                    line,
                    msg: format!("unknown line tag {tag:?}"),
                })
            }
        }
    }
    if in_transform {
        let line = lines.last().map_or(1, |l| l.0);
        return Err(IoError::Parse {
            line,
            msg: "unfinished transform block".into(),
        });
    }
    if let Some(p) = current.take() {
        done.push(p.finish()?);
    }
    Ok(LinkFile { components: done })
}
