//! Luma frame sources: YUV4MPEG2 files and headerless planar 4:2:0 files.
//!
//! Only the Y plane is kept. Chroma bytes are read past and discarded, so a
//! stream holds at most one frame in memory at a time.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One 8-bit luma plane, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LumaFrame {
    width: usize,
    height: usize,
    index: usize,
    samples: Vec<u8>,
}

impl LumaFrame {
    pub fn new(width: usize, height: usize, index: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!("empty frame {width}x{height}")));
        }
        if samples.len() != width * height {
            return Err(Error::Shape {
                expected: width * height,
                found: samples.len(),
            });
        }
        Ok(Self {
            width,
            height,
            index,
            samples,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[u8] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }
}

/// Any source of luma frames.
pub type FrameStream = Box<dyn Iterator<Item = Result<LumaFrame>> + Send>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chroma {
    C420,
    C444,
}

impl Chroma {
    fn payload_bytes(self, width: usize, height: usize) -> usize {
        match self {
            Chroma::C420 => 2 * width.div_ceil(2) * height.div_ceil(2),
            Chroma::C444 => 2 * width * height,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Chroma::C420 => "420jpeg",
            Chroma::C444 => "444",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Y4mHeader {
    pub width: usize,
    pub height: usize,
    pub framerate: (u32, u32),
    pub chroma: Chroma,
}

fn parse_header(line: &[u8]) -> Result<Y4mHeader> {
    let text = std::str::from_utf8(line).map_err(|_| Error::format(0, "header is not ASCII"))?;
    let mut offset = 0u64;
    let mut tokens = text.split(' ');
    let magic = tokens.next().unwrap_or_default();
    if magic != "YUV4MPEG2" {
        return Err(Error::format(0, "missing YUV4MPEG2 signature"));
    }
    offset += magic.len() as u64 + 1;

    let (mut width, mut height) = (None, None);
    let mut framerate = (25, 1);
    let mut chroma = Chroma::C420;
    for token in tokens {
        let at = offset;
        offset += token.len() as u64 + 1;
        if token.is_empty() {
            continue;
        }
        let (tag, value) = token.split_at(1);
        let bad = |what: &str| Error::format(at, format!("bad {what} token `{token}`"));
        match tag {
            "W" => width = Some(value.parse::<usize>().map_err(|_| bad("width"))?),
            "H" => height = Some(value.parse::<usize>().map_err(|_| bad("height"))?),
            "F" => {
                let (n, d) = value.split_once(':').ok_or_else(|| bad("framerate"))?;
                framerate = (
                    n.parse().map_err(|_| bad("framerate"))?,
                    d.parse().map_err(|_| bad("framerate"))?,
                );
            }
            "C" => {
                chroma = match value {
                    "420" | "420jpeg" | "420paldv" | "420mpeg2" => Chroma::C420,
                    "444" => Chroma::C444,
                    v if v.contains('p') => {
                        return Err(Error::format(
                            at,
                            format!("high bit depth input `C{v}` is not supported (8-bit only)"),
                        ))
                    }
                    v => return Err(Error::format(at, format!("unsupported chroma `C{v}`"))),
                }
            }
            // interlacing, aspect, comments and extensions carry nothing we use
            "I" | "A" | "X" => {}
            _ => return Err(Error::format(at, format!("unknown header token `{token}`"))),
        }
    }
    match (width, height) {
        (Some(w), Some(h)) if w > 0 && h > 0 => Ok(Y4mHeader {
            width: w,
            height: h,
            framerate,
            chroma,
        }),
        _ => Err(Error::format(offset, "header lacks positive W and H")),
    }
}

/// Reads bytes up to and excluding `\n`. Returns `None` on clean EOF before any byte.
fn read_line<R: Read>(reader: &mut R, limit: usize) -> io::Result<Option<Vec<u8>>> {
    let mut line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        match reader.read(&mut byte)? {
            0 if line.is_empty() => return Ok(None),
            0 => return Err(io::ErrorKind::UnexpectedEof.into()),
            _ if byte[0] == b'\n' => return Ok(Some(line)),
            _ => {
                line.push(byte[0]);
                if line.len() > limit {
                    return Err(io::Error::new(io::ErrorKind::InvalidData, "line too long"));
                }
            }
        }
    }
}

/// Streaming YUV4MPEG2 reader yielding the luma plane of each `FRAME`.
#[derive(Debug)]
pub struct Y4mReader<R: Read> {
    reader: R,
    header: Y4mHeader,
    offset: u64,
    next_index: usize,
    done: bool,
}

impl<R: Read> Y4mReader<R> {
    pub fn new(mut reader: R) -> Result<Self> {
        let line = match read_line(&mut reader, 1024) {
            Ok(Some(line)) => line,
            Ok(None) => return Err(Error::format(0, "empty file")),
            Err(_) => return Err(Error::format(0, "unterminated header line")),
        };
        let header = parse_header(&line)?;
        Ok(Self {
            reader,
            header,
            offset: line.len() as u64 + 1,
            next_index: 0,
            done: false,
        })
    }

    pub fn header(&self) -> &Y4mHeader {
        &self.header
    }

    fn read_frame(&mut self) -> Result<Option<LumaFrame>> {
        let index = self.next_index;
        let marker_at = self.offset;
        let marker = match read_line(&mut self.reader, 1024) {
            Ok(None) => return Ok(None),
            Ok(Some(m)) => m,
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                return Err(Error::Truncated { frame: index })
            }
            Err(_) => return Err(Error::format(marker_at, "malformed FRAME marker")),
        };
        if !(marker == b"FRAME" || marker.starts_with(b"FRAME ")) {
            return Err(Error::format(marker_at, "expected FRAME marker"));
        }
        self.offset += marker.len() as u64 + 1;

        let Y4mHeader {
            width,
            height,
            chroma,
            ..
        } = self.header;
        let mut luma = vec![0u8; width * height];
        self.reader
            .read_exact(&mut luma)
            .map_err(|_| Error::Truncated { frame: index })?;
        let chroma_len = chroma.payload_bytes(width, height) as u64;
        let skipped = io::copy(&mut (&mut self.reader).take(chroma_len), &mut io::sink())?;
        if skipped != chroma_len {
            return Err(Error::Truncated { frame: index });
        }
        self.offset += (luma.len() as u64) + chroma_len;
        self.next_index += 1;
        LumaFrame::new(width, height, index, luma).map(Some)
    }
}

impl<R: Read> Iterator for Y4mReader<R> {
    type Item = Result<LumaFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.read_frame().transpose();
        if !matches!(item, Some(Ok(_))) {
            self.done = true;
        }
        item
    }
}

pub fn open_y4m(path: impl AsRef<Path>) -> Result<Y4mReader<BufReader<File>>> {
    Y4mReader::new(BufReader::new(File::open(path)?))
}

/// Headerless planar YUV 4:2:0 reader.
pub struct RawYuvReader<R: Read> {
    reader: R,
    width: usize,
    height: usize,
    frames: usize,
    next_index: usize,
}

impl<R: Read> RawYuvReader<R> {
    /// `payload_len` is the total byte length of the source; it must be a whole
    /// number of frames.
    pub fn new(reader: R, width: usize, height: usize, payload_len: u64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!("raw YUV size {width}x{height}")));
        }
        let frame_len = (width * height + Chroma::C420.payload_bytes(width, height)) as u64;
        if payload_len % frame_len != 0 {
            return Err(Error::Truncated {
                frame: (payload_len / frame_len) as usize,
            });
        }
        Ok(Self {
            reader,
            width,
            height,
            frames: (payload_len / frame_len) as usize,
            next_index: 0,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.frames
    }
}

impl<R: Read> Iterator for RawYuvReader<R> {
    type Item = Result<LumaFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next_index >= self.frames {
            return None;
        }
        let index = self.next_index;
        self.next_index += 1;
        let mut luma = vec![0u8; self.width * self.height];
        let chroma_len = Chroma::C420.payload_bytes(self.width, self.height) as u64;
        let read = self.reader.read_exact(&mut luma).and_then(|_| {
            io::copy(&mut (&mut self.reader).take(chroma_len), &mut io::sink())
        });
        match read {
            Ok(n) if n == chroma_len => Some(LumaFrame::new(self.width, self.height, index, luma)),
            _ => {
                self.next_index = self.frames;
                Some(Err(Error::Truncated { frame: index }))
            }
        }
    }
}

pub fn open_raw_yuv(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
) -> Result<RawYuvReader<BufReader<File>>> {
    let file = File::open(path)?;
    let len = file.metadata()?.len();
    RawYuvReader::new(BufReader::new(file), width, height, len)
}

/// Writes 8-bit Y4M with mid-grey chroma.
pub struct Y4mWriter<W: Write> {
    writer: W,
    header: Y4mHeader,
}

impl<W: Write> Y4mWriter<W> {
    pub fn new(mut writer: W, header: Y4mHeader) -> Result<Self> {
        writeln!(
            writer,
            "YUV4MPEG2 W{} H{} F{}:{} Ip A1:1 C{}",
            header.width,
            header.height,
            header.framerate.0,
            header.framerate.1,
            header.chroma.tag()
        )?;
        Ok(Self { writer, header })
    }

    pub fn write_frame(&mut self, frame: &LumaFrame) -> Result<()> {
        if frame.width() != self.header.width || frame.height() != self.header.height {
            return Err(Error::Dimension(format!(
                "frame {}x{} in a {}x{} stream",
                frame.width(),
                frame.height(),
                self.header.width,
                self.header.height
            )));
        }
        self.writer.write_all(b"FRAME\n")?;
        self.writer.write_all(frame.samples())?;
        let chroma = vec![128u8; self.header.chroma.payload_bytes(frame.width(), frame.height())];
        self.writer.write_all(&chroma)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.writer.flush()?;
        Ok(self.writer)
    }
}

pub fn write_y4m(path: impl AsRef<Path>, frames: &[LumaFrame], framerate: (u32, u32)) -> Result<()> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Config("no frames to write".into()))?;
    let header = Y4mHeader {
        width: first.width(),
        height: first.height(),
        framerate,
        chroma: Chroma::C420,
    };
    let mut writer = Y4mWriter::new(BufWriter::new(File::create(path)?), header)?;
    for frame in frames {
        writer.write_frame(frame)?;
    }
    writer.finish()?;
    Ok(())
}
