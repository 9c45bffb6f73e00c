//! Minimal WKT reader/writer for the four supported tags.
//!
//! Accepts `POINT`, `LINESTRING`, `POLYGON`, `MULTIPOLYGON` (case-insensitive,
//! arbitrary whitespace). `EMPTY`, Z/M dimensions and other tags are rejected.
//! Numbers are written with Rust's shortest-round-trip formatting, so
//! `parse(write(g)) == g` bit-for-bit.

use super::{Geometry, GeometryError, Point2, Polygon};

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Scanner { bytes: text.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, GeometryError> {
        Err(GeometryError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), GeometryError> {
        if self.eat(b) {
            Ok(())
        } else {
            self.err(format!("expected `{}`", b as char))
        }
    }

    fn keyword(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.bytes[start..self.pos]).to_ascii_uppercase()
    }

    fn number(&mut self) -> Result<f64, GeometryError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        s.parse::<f64>().or_else(|_| self.err(format!("bad number `{s}`")))
    }

    fn point(&mut self) -> Result<Point2, GeometryError> {
        let x = self.number()?;
        let y = self.number()?;
        Ok(Point2::new(x, y))
    }

    /// `( p, p, ... )`
    fn point_list(&mut self) -> Result<Vec<Point2>, GeometryError> {
        self.expect(b'(')?;
        let mut pts = vec![self.point()?];
        while self.eat(b',') {
            pts.push(self.point()?);
        }
        self.expect(b')')?;
        Ok(pts)
    }

    /// `( (ring), (ring), ... )`
    fn ring_list(&mut self) -> Result<Polygon, GeometryError> {
        self.expect(b'(')?;
        let exterior = self.point_list()?;
        let mut holes = Vec::new();
        while self.eat(b',') {
            holes.push(self.point_list()?);
        }
        self.expect(b')')?;
        Ok(Polygon { exterior, holes })
    }

    fn done(&mut self) -> Result<(), GeometryError> {
        if self.peek().is_some() {
            self.err("trailing characters after geometry")
        } else {
            Ok(())
        }
    }
}

pub(super) fn parse(text: &str) -> Result<Geometry, GeometryError> {
    let mut sc = Scanner::new(text);
    let tag = sc.keyword();
    if sc.keyword() == "EMPTY" {
        return Err(GeometryError::Validation("EMPTY geometries are not supported".into()));
    }
    let g = match tag.as_str() {
        "POINT" => {
            sc.expect(b'(')?;
            let p = sc.point()?;
            sc.expect(b')')?;
            Geometry::Point(p)
        }
        "LINESTRING" => Geometry::Polyline(sc.point_list()?),
        "POLYGON" => Geometry::Polygon(sc.ring_list()?),
        "MULTIPOLYGON" => {
            sc.expect(b'(')?;
            let mut pgs = vec![sc.ring_list()?];
            while sc.eat(b',') {
                pgs.push(sc.ring_list()?);
            }
            sc.expect(b')')?;
            Geometry::MultiPolygon(pgs)
        }
        "" => return sc.err("expected a geometry tag"),
        other => return Err(GeometryError::Unsupported(other.to_string())),
    };
    sc.done()?;
    Ok(g)
}

fn write_points(out: &mut String, pts: &[Point2]) {
    out.push('(');
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&format!("{} {}", p.x, p.y));
    }
    out.push(')');
}

fn write_rings(out: &mut String, pg: &Polygon) {
    out.push('(');
    write_points(out, &pg.exterior);
    for h in &pg.holes {
        out.push_str(", ");
        write_points(out, h);
    }
    out.push(')');
}

pub(super) fn write(g: &Geometry) -> String {
    let mut s = String::new();
    match g {
        Geometry::Point(p) => s.push_str(&format!("POINT ({} {})", p.x, p.y)),
        Geometry::Polyline(pts) => {
            s.push_str("LINESTRING ");
            write_points(&mut s, pts);
        }
        Geometry::Polygon(pg) => {
            s.push_str("POLYGON ");
            write_rings(&mut s, pg);
        }
        Geometry::MultiPolygon(pgs) => {
            s.push_str("MULTIPOLYGON (");
            for (i, pg) in pgs.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_rings(&mut s, pg);
            }
            s.push(')');
        }
    }
    s
}
