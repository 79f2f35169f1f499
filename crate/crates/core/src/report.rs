//! Files describing a run: community tag-clouds, heatmaps and an HTML page.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use base64::Engine;

use crate::clustering::CommunityAssignment;
use crate::error::{Error, Result};
use crate::ingest::Corpus;
use crate::similarity::{SimilarityMatrix, StrengthHistogram};

pub const DEFAULT_TOP_N: usize = 30;

/// Font-size range for tag display weights, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FontRange {
    pub min: f64,
    pub max: f64,
}

impl Default for FontRange {
    fn default() -> Self {
        FontRange { min: 10.0, max: 40.0 }
    }
}

impl FontRange {
    /// `min + (max - min) * ln(f) / ln(f_max)`; frequency 1 (and any cloud
    /// whose top frequency is 1) maps to `min`.
    pub fn weight(&self, frequency: u64, top: u64) -> f64 {
        if top <= 1 || frequency <= 1 {
            return self.min;
        }
        let x = (frequency as f64).ln() / (top as f64).ln();
        self.min + (self.max - self.min) * x.min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TagEntry {
    pub tag: String,
    pub frequency: u64,
    pub display_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityTagCloud {
    pub community: usize,
    pub size: usize,
    /// Descending frequency, ties by tag.
    pub entries: Vec<TagEntry>,
}

/// Tag frequencies summed over each community's members, keeping the
/// `top_n` most frequent tags. Communities come out largest first.
pub fn community_tagclouds(
    corpus: &Corpus,
    assignment: &CommunityAssignment,
    resources: &[String],
    top_n: usize,
    fonts: FontRange,
) -> Result<Vec<CommunityTagCloud>> {
    if top_n == 0 {
        return Err(Error::Config("top_n must be at least 1".into()));
    }
    if resources.len() != assignment.labels().len() {
        return Err(Error::Dimension("resource list does not match assignment".into()));
    }
    let mut clouds = Vec::with_capacity(assignment.k());
    for c in 0..assignment.k() {
        let members = assignment.members(c);
        let mut freqs: BTreeMap<&str, u64> = BTreeMap::new();
        for &i in &members {
            let cloud = corpus
                .cloud(&resources[i])
                .ok_or_else(|| Error::Inconsistent(format!("resource {:?} not in corpus", resources[i])))?;
            for (t, &f) in cloud.freqs() {
                *freqs.entry(t).or_insert(0) += f;
            }
        }
        let mut ranked: Vec<(&str, u64)> = freqs.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        ranked.truncate(top_n);
        let top = ranked.first().map_or(1, |e| e.1);
        clouds.push(CommunityTagCloud {
            community: c,
            size: members.len(),
            entries: ranked
                .into_iter()
                .map(|(t, f)| TagEntry {
                    tag: t.to_owned(),
                    frequency: f,
                    display_weight: fonts.weight(f, top),
                })
                .collect(),
        });
    }
    // Assignment ids already follow decreasing size; keep that order explicit.
    clouds.sort_by(|a, b| b.size.cmp(&a.size).then(a.community.cmp(&b.community)));
    Ok(clouds)
}

/// CSV `community,size,rank,tag,frequency,display_weight`.
pub fn write_tagclouds_csv<W: Write>(clouds: &[CommunityTagCloud], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["community", "size", "rank", "tag", "frequency", "display_weight"])?;
    for c in clouds {
        for (rank, e) in c.entries.iter().enumerate() {
            w.write_record([
                c.community.to_string(),
                c.size.to_string(),
                (rank + 1).to_string(),
                e.tag.clone(),
                e.frequency.to_string(),
                e.display_weight.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_tagclouds_csv<R: Read>(input: R) -> Result<Vec<CommunityTagCloud>> {
    let mut r = csv::Reader::from_reader(input);
    let mut clouds: Vec<CommunityTagCloud> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let get = |k: usize| rec.get(k).ok_or_else(|| Error::parse(line, "missing column"));
        let int = |k: usize| -> Result<u64> { get(k)?.parse().map_err(|_| Error::parse(line, "bad integer")) };
        let community = int(0)? as usize;
        let size = int(1)? as usize;
        let entry = TagEntry {
            tag: get(3)?.to_owned(),
            frequency: int(4)?,
            display_weight: get(5)?.parse().map_err(|_| Error::parse(line, "bad weight"))?,
        };
        match clouds.last_mut() {
            Some(c) if c.community == community => c.entries.push(entry),
            _ => clouds.push(CommunityTagCloud {
                community,
                size,
                entries: vec![entry],
            }),
        }
    }
    Ok(clouds)
}

/// 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    /// One pixel per cell, intensity `round(255 * value)`, row 0 at the top.
    pub fn from_matrix(m: &SimilarityMatrix) -> Self {
        let n = m.n();
        GrayImage {
            width: n,
            height: n,
            pixels: m
                .values()
                .as_slice()
                .iter()
                .map(|v| (255.0 * v.clamp(0.0, 1.0)).round() as u8)
                .collect(),
        }
    }

    pub fn pixel(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Binary PGM (`P5`, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let mut fields = Vec::with_capacity(4);
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::parse(0, "truncated PGM header"));
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| Error::parse(0, "bad PGM header"))?);
        }
        if fields[0] != "P5" {
            return Err(Error::parse(0, "not a binary PGM (P5)"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(0, "bad PGM header"));
        let (width, height, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
        if maxval != 255 {
            return Err(Error::parse(0, "only maxval 255 is supported"));
        }
        let data = &bytes[pos + 1..];
        if data.len() != width * height {
            return Err(Error::parse(0, "PGM pixel data has the wrong length"));
        }
        Ok(GrayImage {
            width,
            height,
            pixels: data.to_vec(),
        })
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().map_err(|e| Error::Io(std::io::Error::other(e)))?;
            w.write_image_data(&self.pixels)
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        Ok(out)
    }
}

/// Writes a strength matrix as a PGM heatmap.
pub fn render_heatmap(m: &SimilarityMatrix, path: &Path) -> Result<()> {
    if m.n() == 0 {
        return Err(Error::EmptyInput("empty matrix".into()));
    }
    fs::write(path, GrayImage::from_matrix(m).to_pgm())?;
    Ok(())
}

/// Everything shown on the HTML page.
#[derive(Debug, Clone, Default)]
pub struct ReportContent {
    pub title: String,
    /// Free-form `(label, value)` lines for the summary table.
    pub summary: Vec<(String, String)>,
    pub tagclouds: Vec<CommunityTagCloud>,
    pub eigenvalues: Vec<f64>,
    pub histogram: Option<StrengthHistogram>,
    pub heatmaps: Vec<(String, GrayImage)>,
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders a self-contained page (heatmaps inlined as PNG data URIs).
pub fn render_html(content: &ReportContent) -> Result<String> {
    let mut h = String::new();
    let title = escape(&content.title);
    let _ = write!(
        h,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\"/>\n<title>{title}</title>\n\
         <style>\nbody {{ font-family: sans-serif; margin: 2em; }}\n\
         .cloud {{ border: 1px solid #ccc; padding: 1em; margin-bottom: 1em; line-height: 1.6; }}\n\
         .cloud span {{ margin-right: 0.5em; }}\n\
         table {{ border-collapse: collapse; }}\n\
         td, th {{ border: 1px solid #ddd; padding: 2px 8px; text-align: right; }}\n\
         img {{ image-rendering: pixelated; width: 400px; height: 400px; border: 1px solid #999; }}\n\
         </style>\n</head>\n<body>\n<h1>{title}</h1>\n"
    );

    if !content.summary.is_empty() {
        h.push_str("<h2>Summary</h2>\n<table>\n");
        for (k, v) in &content.summary {
            let _ = writeln!(h, "<tr><th>{}</th><td>{}</td></tr>", escape(k), escape(v));
        }
        h.push_str("</table>\n");
    }

    h.push_str("<h2>Communities</h2>\n");
    if content.tagclouds.is_empty() {
        h.push_str("<p class=\"notice\">No communities.</p>\n");
    }
    for (rank, c) in content.tagclouds.iter().enumerate() {
        let _ = writeln!(
            h,
            "<section class=\"community\" id=\"community-{}\">\n<h3>Community {} ({} resources)</h3>\n<div class=\"cloud\">",
            c.community,
            rank + 1,
            c.size
        );
        for e in &c.entries {
            let _ = writeln!(
                h,
                "<span style=\"font-size: {:.1}px\" title=\"{}\">{}</span>",
                e.display_weight,
                e.frequency,
                escape(&e.tag)
            );
        }
        h.push_str("</div>\n</section>\n");
    }

    if !content.heatmaps.is_empty() {
        h.push_str("<h2>Strength matrices</h2>\n");
        for (name, img) in &content.heatmaps {
            let png = base64::engine::general_purpose::STANDARD.encode(img.to_png()?);
            let _ = writeln!(
                h,
                "<figure>\n<img alt=\"{0}\" src=\"data:image/png;base64,{png}\"/>\n<figcaption>{0}</figcaption>\n</figure>",
                escape(name)
            );
        }
    }

    if !content.eigenvalues.is_empty() {
        h.push_str("<h2>Spectrum</h2>\n<table>\n<tr><th>index</th><th>eigenvalue</th></tr>\n");
        for (i, l) in content.eigenvalues.iter().enumerate() {
            let _ = writeln!(h, "<tr><td>{}</td><td>{:.6e}</td></tr>", i + 1, l);
        }
        h.push_str("</table>\n");
    }

    if let Some(hist) = &content.histogram {
        h.push_str(
            "<h2>Link strengths</h2>\n<table>\n<tr><th>lower</th><th>upper</th><th>count</th><th>density</th></tr>\n",
        );
        for b in &hist.bins {
            let _ = writeln!(
                h,
                "<tr><td>{:.4e}</td><td>{:.4e}</td><td>{}</td><td>{:.4e}</td></tr>",
                b.lower, b.upper, b.count, b.density
            );
        }
        h.push_str("</table>\n");
        if hist.zero_count > 0 {
            let _ = writeln!(h, "<p>{} pairs with zero strength.</p>", hist.zero_count);
        }
    }

    h.push_str("</body>\n</html>\n");
    Ok(h)
}

pub fn render_report(content: &ReportContent, path: &Path) -> Result<()> {
    fs::write(path, render_html(content)?)?;
    Ok(())
}
