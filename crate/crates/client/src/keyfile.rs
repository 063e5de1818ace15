//! Voter key file:
//!
//! ```text
//! selene-keyfile v1
//! group test
//! voter_id alice
//! trapdoor_sk 07
//! signing_sk 03
//! ```
//!
//! Keys are hex of their canonical scalar bytes. `voter_id` and `signing_sk`
//! may be absent; a verification-only device needs just the trapdoor key.

use std::path::Path;

use selene_core::{GroupCtx, GroupProfile, SecretKey};

use crate::error::{ClientError, Result};

pub const HEADER: &str = "selene-keyfile v1";

#[derive(Debug, Clone)]
pub struct KeyFile {
    pub group: GroupProfile,
    pub voter_id: Option<String>,
    pub trapdoor: SecretKey,
    pub signing: Option<SecretKey>,
}

impl KeyFile {
    pub fn parse(text: &str) -> Result<Self> {
        let err = |m: String| ClientError::KeyFile(m);
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some(HEADER) => {}
            other => return Err(err(format!("expected `{HEADER}` header, found {other:?}"))),
        }
        let (mut group, mut voter_id, mut trapdoor, mut signing) = (None, None, None, None);
        for line in lines {
            let (key, value) = line.split_once(' ').ok_or_else(|| err(format!("malformed line `{line}`")))?;
            let value = value.trim().to_owned();
            let slot = match key {
                "group" => &mut group,
                "voter_id" => &mut voter_id,
                "trapdoor_sk" => &mut trapdoor,
                "signing_sk" => &mut signing,
                other => return Err(err(format!("unknown field `{other}`"))),
            };
            if slot.replace(value).is_some() {
                return Err(err(format!("duplicate field `{key}`")));
            }
        }
        let group: GroupProfile =
            group.ok_or_else(|| err("missing `group`".into()))?.parse().map_err(|e| err(format!("{e}")))?;
        let ctx = GroupCtx::from_profile(group);
        let key = |name: &str, hex: &str| SecretKey::from_hex(&ctx, hex).map_err(|e| err(format!("{name}: {e}")));
        Ok(KeyFile {
            group,
            voter_id,
            trapdoor: key("trapdoor_sk", &trapdoor.ok_or_else(|| err("missing `trapdoor_sk`".into()))?)?,
            signing: signing.map(|s| key("signing_sk", &s)).transpose()?,
        })
    }

    pub fn render(&self) -> String {
        let mut out = format!("{HEADER}\ngroup {}\n", self.group);
        if let Some(id) = &self.voter_id {
            out += &format!("voter_id {id}\n");
        }
        out += &format!("trapdoor_sk {}\n", self.trapdoor.expose_hex());
        if let Some(s) = &self.signing {
            out += &format!("signing_sk {}\n", s.expose_hex());
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Writes with owner-only permissions.
    pub fn save(&self, path: &Path) -> Result<()> {
        write_private(path, self.render().as_bytes())
    }
}

pub fn write_private(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut options = std::fs::OpenOptions::new();
    options.write(true).create(true).truncate(true);
    #[cfg(unix)]
    std::os::unix::fs::OpenOptionsExt::mode(&mut options, 0o600);
    std::io::Write::write_all(&mut options.open(path)?, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_roundtrip() {
        let ctx = GroupCtx::test();
        let kf = KeyFile {
            group: GroupProfile::Test,
            voter_id: Some("alice".into()),
            trapdoor: SecretKey::from_u64(&ctx, 7).unwrap(),
            signing: Some(SecretKey::from_u64(&ctx, 3).unwrap()),
        };
        let text = kf.render();
        assert!(text.starts_with("selene-keyfile v1\n"));
        let back = KeyFile::parse(&text).unwrap();
        assert_eq!(back.render(), text);
        assert_eq!(back.trapdoor.expose(), kf.trapdoor.expose());
    }

    #[test]
    fn verification_only_file() {
        let kf = KeyFile::parse("selene-keyfile v1\ngroup test\ntrapdoor_sk 05\n").unwrap();
        assert!(kf.signing.is_none());
        assert!(kf.voter_id.is_none());
    }

    #[test]
    fn rejects_bad_files() {
        for text in [
            "",
            "selene-keyfile v2\ngroup test\ntrapdoor_sk 05\n",
            "selene-keyfile v1\ntrapdoor_sk 05\n",
            "selene-keyfile v1\ngroup test\n",
            "selene-keyfile v1\ngroup test\ntrapdoor_sk 00\n",
            "selene-keyfile v1\ngroup test\ntrapdoor_sk 05\ntrapdoor_sk 06\n",
            "selene-keyfile v1\ngroup test\ntrapdoor_sk 05\ncolour blue\n",
        ] {
            assert!(KeyFile::parse(text).is_err(), "{text:?}");
        }
    }
}
