//! Framed byte encoding of a word batch.
//!
//! Layout (all integers little-endian `u32`):
//!
//! ```text
//! "WCX1" | count | len[0] .. len[count-1] | utf8(word[0]) .. utf8(word[count-1])
//! ```
//!
//! The count and lengths travel inside the frame, so a receiver needs no
//! side-channel message to size its buffers.

use thiserror::Error;

use crate::text::{WordList, WordToken};

pub const MAGIC: [u8; 4] = *b"WCX1";
const HEADER_LEN: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("malformed frame: expected magic \"WCX1\", found {found:02x?}")]
    BadMagic { found: Vec<u8> },
    #[error("truncated frame: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("framing error: {extra} trailing bytes after last word")]
    TrailingBytes { extra: usize },
    #[error("word {index} is not valid UTF-8")]
    Encoding { index: usize },
    #[error("word {index} is not a normalized token")]
    NotNormalized { index: usize },
    #[error("batch too large: {0}")]
    TooLarge(String),
}

/// One encoded word batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireMessage {
    payload: Vec<u8>,
}

impl WireMessage {
    /// Wraps received bytes. No validation happens until [`decode_message`].
    pub fn from_bytes(payload: Vec<u8>) -> Self {
        Self { payload }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.payload
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.payload
    }

    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }
}

pub fn encode_message(words: &WordList) -> Result<WireMessage, WireError> {
    encode_tokens(words.words())
}

pub(crate) fn encode_tokens(words: &[WordToken]) -> Result<WireMessage, WireError> {
    let count = u32::try_from(words.len())
        .map_err(|_| WireError::TooLarge(format!("{} words", words.len())))?;
    let body: usize = words.iter().map(|w| w.as_str().len()).sum();
    let mut buf = Vec::with_capacity(HEADER_LEN + 4 * words.len() + body);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&count.to_le_bytes());
    for w in words {
        let len = u32::try_from(w.as_str().len())
            .map_err(|_| WireError::TooLarge(format!("word of {} bytes", w.as_str().len())))?;
        buf.extend_from_slice(&len.to_le_bytes());
    }
    for w in words {
        buf.extend_from_slice(w.as_str().as_bytes());
    }
    Ok(WireMessage { payload: buf })
}

fn read_u32(buf: &[u8], at: usize) -> Result<u32, WireError> {
    let end = at + 4;
    let bytes = buf.get(at..end).ok_or(WireError::Truncated {
        needed: end,
        available: buf.len(),
    })?;
    Ok(u32::from_le_bytes(bytes.try_into().expect("4-byte slice")))
}

pub fn decode_message(msg: &WireMessage) -> Result<WordList, WireError> {
    let buf = msg.as_bytes();
    let magic_seen = &buf[..buf.len().min(MAGIC.len())];
    if magic_seen != &MAGIC[..magic_seen.len()] {
        return Err(WireError::BadMagic {
            found: magic_seen.to_vec(),
        });
    }
    let count = read_u32(buf, 4)? as usize;

    // Check the length table fits before allocating from an untrusted count.
    let table_end = count
        .checked_mul(4)
        .and_then(|t| t.checked_add(HEADER_LEN))
        .ok_or(WireError::Truncated {
            needed: usize::MAX,
            available: buf.len(),
        })?;
    if table_end > buf.len() {
        return Err(WireError::Truncated {
            needed: table_end,
            available: buf.len(),
        });
    }

    let mut words = Vec::with_capacity(count);
    let mut cursor = table_end;
    for index in 0..count {
        let len = read_u32(buf, HEADER_LEN + 4 * index)? as usize;
        let end = cursor + len;
        let raw = buf.get(cursor..end).ok_or(WireError::Truncated {
            needed: end,
            available: buf.len(),
        })?;
        let s = std::str::from_utf8(raw).map_err(|_| WireError::Encoding { index })?;
        words.push(WordToken::new(s).ok_or(WireError::NotNormalized { index })?);
        cursor = end;
    }
    if cursor != buf.len() {
        return Err(WireError::TrailingBytes {
            extra: buf.len() - cursor,
        });
    }
    Ok(WordList::new(words))
}
