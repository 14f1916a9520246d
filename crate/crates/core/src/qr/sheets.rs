//! SVG print sheets: card fronts and backs on A4 with 63x88 mm frames, the
//! avatar cards, and the two board faces.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{encode_payload, EcLevel, PayloadError, QrCode, QrError};
use crate::pack::{validate_pack, Card, ContentPack, Deck, ValidationReport};

const A4: (f64, f64) = (210.0, 297.0);
const A4_LANDSCAPE: (f64, f64) = (297.0, 210.0);
const A3_LANDSCAPE: (f64, f64) = (420.0, 297.0);
const CARD_W: f64 = 63.0;
const CARD_H: f64 = 88.0;
const GRID_COLS: usize = 3;
const GRID_ROWS: usize = 3;
pub const CARDS_PER_PAGE: usize = GRID_COLS * GRID_ROWS;
/// Light modules around the symbol required by readers.
const QUIET_ZONE: usize = 4;
const QR_SIDE_MM: f64 = 46.0;

#[derive(Debug, Error)]
pub enum PrintError {
    #[error("pack is invalid: {0}")]
    InvalidPack(ValidationReport),
    #[error(transparent)]
    Payload(#[from] PayloadError),
    #[error(transparent)]
    Qr(#[from] QrError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvgPage {
    pub file_name: String,
    pub svg: String,
}

/// All printable pages for one pack.
#[derive(Debug, Clone)]
pub struct PrintSet {
    pub card_fronts: Vec<SvgPage>,
    pub card_backs: Vec<SvgPage>,
    pub avatar_cards: Vec<SvgPage>,
    pub board_decoration: SvgPage,
    pub board_escape: SvgPage,
    /// Number of individual card faces drawn on the front and back pages.
    pub front_count: usize,
    pub back_count: usize,
}

impl PrintSet {
    pub fn pages(&self) -> impl Iterator<Item = &SvgPage> {
        self.card_fronts
            .iter()
            .chain(&self.card_backs)
            .chain(&self.avatar_cards)
            .chain([&self.board_decoration, &self.board_escape])
    }

    pub fn write_to_dir(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.pages()
            .map(|page| {
                let path = dir.join(&page.file_name);
                std::fs::write(&path, &page.svg)?;
                Ok(path)
            })
            .collect()
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn page_open(size: (f64, f64)) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}mm\" height=\"{h}mm\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
        w = size.0,
        h = size.1
    )
}

fn grid_origin(index: usize, mirrored: bool) -> (f64, f64) {
    let x0 = (A4.0 - GRID_COLS as f64 * CARD_W) / 2.0;
    let y0 = (A4.1 - GRID_ROWS as f64 * CARD_H) / 2.0;
    let row = index / GRID_COLS;
    let mut col = index % GRID_COLS;
    // Backs are mirrored so duplex printing lines them up with their fronts.
    if mirrored {
        col = GRID_COLS - 1 - col;
    }
    (x0 + col as f64 * CARD_W, y0 + row as f64 * CARD_H)
}

fn card_frame(svg: &mut String, x: f64, y: f64) {
    let _ = writeln!(
        svg,
        "<rect x=\"{x}\" y=\"{y}\" width=\"{CARD_W}\" height=\"{CARD_H}\" rx=\"3\" fill=\"none\" stroke=\"black\" stroke-width=\"0.3\"/>"
    );
}

fn text(svg: &mut String, x: f64, y: f64, size: f64, content: &str) {
    let _ = writeln!(
        svg,
        "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"{size}\" text-anchor=\"middle\">{}</text>",
        escape(content)
    );
}

fn person_outline(svg: &mut String, cx: f64, top: f64, scale: f64) {
    let _ = writeln!(
        svg,
        "<g class=\"avatar-outline\" fill=\"none\" stroke=\"black\" stroke-width=\"0.6\">\
         <circle cx=\"{cx:.2}\" cy=\"{:.2}\" r=\"{:.2}\"/>\
         <path d=\"M{:.2},{:.2} q{:.2},{:.2} {:.2},0 M{:.2},{:.2} v{:.2} M{:.2},{:.2} v{:.2}\"/></g>",
        top + 8.0 * scale,
        7.0 * scale,
        cx - 14.0 * scale,
        top + 45.0 * scale,
        14.0 * scale,
        -32.0 * scale,
        28.0 * scale,
        cx - 14.0 * scale,
        top + 45.0 * scale,
        10.0 * scale,
        cx + 14.0 * scale,
        top + 45.0 * scale,
        10.0 * scale,
    );
}

fn draw_front(svg: &mut String, deck: &Deck, card: &Card, x: f64, y: f64) {
    let _ = writeln!(svg, "<g class=\"card-front\" data-card=\"{}\">", escape(card.id.as_str()));
    let _ =
        writeln!(svg, "<rect x=\"{x}\" y=\"{y}\" width=\"{CARD_W}\" height=\"12\" fill=\"{}\"/>", escape(&deck.colour));
    card_frame(svg, x, y);
    text(svg, x + CARD_W / 2.0, y + 8.0, 4.5, &deck.name);
    text(svg, x + CARD_W / 2.0, y + CARD_H / 2.0, 6.0, &format!("[{}]", card.symbol));
    text(svg, x + CARD_W / 2.0, y + CARD_H - 10.0, 4.0, card.label());
    svg.push_str("</g>\n");
}

fn draw_back(svg: &mut String, deck: &Deck, card: &Card, x: f64, y: f64) -> Result<(), PrintError> {
    let payload = encode_payload(deck.id.as_str(), card.id.as_str())?;
    let code = QrCode::encode_bytes(payload.as_bytes(), EcLevel::M)?;
    let modules = code.size() + 2 * QUIET_ZONE;
    let unit = QR_SIDE_MM / modules as f64;
    let qx = x + (CARD_W - QR_SIDE_MM) / 2.0;
    let qy = y + 24.0;

    let _ = writeln!(svg, "<g class=\"card-back\" data-card=\"{}\">", escape(card.id.as_str()));
    card_frame(svg, x, y);
    text(svg, x + CARD_W / 2.0, y + 14.0, 6.0, &deck.name);
    let _ = writeln!(
        svg,
        "<g class=\"qr\" data-payload=\"{}\" data-modules=\"{}\" transform=\"translate({qx:.3} {qy:.3}) scale({unit:.5})\">\
         <rect width=\"{modules}\" height=\"{modules}\" fill=\"white\"/>\
         <path transform=\"translate({QUIET_ZONE} {QUIET_ZONE})\" fill=\"black\" d=\"{}\"/></g>",
        escape(&payload),
        code.size(),
        code.svg_path()
    );
    svg.push_str("</g>\n");
    Ok(())
}

fn paginate<T>(
    items: &[T],
    prefix: &str,
    mut draw: impl FnMut(&mut String, &T, f64, f64) -> Result<(), PrintError>,
    mirrored: bool,
) -> Result<Vec<SvgPage>, PrintError> {
    items
        .chunks(CARDS_PER_PAGE)
        .enumerate()
        .map(|(n, chunk)| {
            let mut svg = page_open(A4);
            for (i, item) in chunk.iter().enumerate() {
                let (x, y) = grid_origin(i, mirrored);
                draw(&mut svg, item, x, y)?;
            }
            svg.push_str("</svg>\n");
            Ok(SvgPage { file_name: format!("{prefix}_{}.svg", n + 1), svg })
        })
        .collect()
}

fn decoration_board(pack: &ContentPack) -> SvgPage {
    let (w, h) = A3_LANDSCAPE;
    let mut svg = page_open(A3_LANDSCAPE);
    text(&mut svg, w / 2.0, 16.0, 9.0, "Lockdown Room");
    let gap = 10.0;
    let slots = &pack.board.decoration_slots;
    let cells = slots.len() + usize::from(pack.board.avatar_slot);
    let cols = cells.div_ceil(2).max(1);
    let x0 = (w - cols as f64 * CARD_W - (cols - 1) as f64 * gap) / 2.0;
    let y0 = (h - 2.0 * CARD_H - gap) / 2.0 + 8.0;
    let cell = |i: usize| (x0 + (i % cols) as f64 * (CARD_W + gap), y0 + (i / cols) as f64 * (CARD_H + gap));
    let mut i = 0;
    if pack.board.avatar_slot {
        let (x, y) = cell(i);
        let _ = writeln!(&mut svg, "<g class=\"slot avatar-slot\">");
        card_frame(&mut svg, x, y);
        person_outline(&mut svg, x + CARD_W / 2.0, y + 18.0, 1.0);
        text(&mut svg, x + CARD_W / 2.0, y + CARD_H - 6.0, 4.5, "Avatar");
        svg.push_str("</g>\n");
        i += 1;
    }
    for slot in slots {
        let (x, y) = cell(i);
        let deck = pack.deck(slot.deck.as_str());
        let name = deck.map_or(slot.deck.as_str(), |d| d.name.as_str());
        let colour = deck.map_or("black", |d| d.colour.as_str());
        let _ = writeln!(
            &mut svg,
            "<g class=\"slot decoration-slot\" data-slot=\"{}\">\
             <rect x=\"{x}\" y=\"{y}\" width=\"{CARD_W}\" height=\"{CARD_H}\" rx=\"3\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" stroke-dasharray=\"3 2\"/>",
            escape(slot.id.as_str()),
            escape(colour)
        );
        text(&mut svg, x + CARD_W / 2.0, y + CARD_H / 2.0, 6.0, name);
        svg.push_str("</g>\n");
        i += 1;
    }
    svg.push_str("</svg>\n");
    SvgPage { file_name: "board_decoration.svg".into(), svg }
}

fn escape_board(pack: &ContentPack) -> SvgPage {
    let (w, h) = A4_LANDSCAPE;
    let mut svg = page_open(A4_LANDSCAPE);
    let piles = pack.board.pile_slots.max(1) as f64;
    let gap = ((w - 20.0 - piles * CARD_W) / (piles - 1.0).max(1.0)).min(20.0);
    let x0 = (w - piles * CARD_W - (piles - 1.0) * gap) / 2.0;
    let y0 = 10.0;
    for p in 0..pack.board.pile_slots {
        let x = x0 + p as f64 * (CARD_W + gap);
        let _ = writeln!(&mut svg, "<g class=\"slot pile-slot\" data-pile=\"{}\">", p + 1);
        card_frame(&mut svg, x, y0);
        text(&mut svg, x + CARD_W / 2.0, y0 + CARD_H / 2.0, 6.0, &format!("Pile {}", p + 1));
        svg.push_str("</g>\n");
    }
    if pack.board.uncovered_slot {
        let y = y0 + CARD_H + 8.0;
        let height = h - y - 10.0;
        let _ = writeln!(
            &mut svg,
            "<g class=\"slot uncovered-slot\"><rect x=\"10\" y=\"{y}\" width=\"{}\" height=\"{height}\" rx=\"6\" fill=\"none\" stroke=\"black\" stroke-width=\"0.8\"/>",
            w - 20.0
        );
        text(&mut svg, w / 2.0, y + height / 2.0, 7.0, "Uncovered items");
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    SvgPage { file_name: "board_escape.svg".into(), svg }
}

/// Renders every card face, the avatar cards and both board faces.
pub fn render_print_sheets(pack: &ContentPack) -> Result<PrintSet, PrintError> {
    let report = validate_pack(pack);
    if !report.is_valid() {
        return Err(PrintError::InvalidPack(report));
    }
    let cards: Vec<(&Deck, &Card)> = pack.decks.iter().flat_map(|d| d.cards.iter().map(move |c| (d, c))).collect();

    let card_fronts = paginate(
        &cards,
        "cards_front",
        |svg, (deck, card), x, y| {
            draw_front(svg, deck, card, x, y);
            Ok(())
        },
        false,
    )?;
    let card_backs = paginate(&cards, "cards_back", |svg, (deck, card), x, y| draw_back(svg, deck, card, x, y), true)?;

    // The blank outline card is always printed so players can draw their own.
    let mut avatars: Vec<Option<&str>> = vec![None];
    avatars.extend(pack.avatars.iter().map(|a| Some(a.name.as_str())));
    let avatar_cards = paginate(
        &avatars,
        "avatar_cards",
        |svg, name, x, y| {
            let _ = writeln!(svg, "<g class=\"avatar-card\">");
            card_frame(svg, x, y);
            person_outline(svg, x + CARD_W / 2.0, y + 14.0, 1.3);
            if let Some(name) = name {
                text(svg, x + CARD_W / 2.0, y + CARD_H - 8.0, 5.0, name);
            }
            svg.push_str("</g>\n");
            Ok(())
        },
        false,
    )?;

    Ok(PrintSet {
        front_count: cards.len(),
        back_count: cards.len(),
        card_fronts,
        card_backs,
        avatar_cards,
        board_decoration: decoration_board(pack),
        board_escape: escape_board(pack),
    })
}
