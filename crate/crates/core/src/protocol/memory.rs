use crate::backend::SourceElement;
use crate::error::{Error, Result};
use crate::protocol::adversary::{AdversaryLog, Observation};
use crate::protocol::{eot_select, Measurement};
use crate::scheme::{IndexSelection, SchemeParams};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Slot {
    Populated(SourceElement),
    Erased,
}

/// One session's subkeys behind a read-once interface.
#[derive(Debug)]
pub struct ObliviousBuffer {
    session: u64,
    slots: Vec<Slot>,
    consumed: bool,
}

/// The subkeys handed out by a read, in digit-position order.
#[derive(Clone, Debug)]
pub struct ServedKeys {
    pub selection: IndexSelection,
    pub subkeys: Vec<SourceElement>,
}

impl ObliviousBuffer {
    /// `session` is the quote counter the keys belong to.
    pub fn load(session: u64, subkeys: Vec<SourceElement>) -> Self {
        ObliviousBuffer {
            session,
            slots: subkeys.into_iter().map(Slot::Populated).collect(),
            consumed: false,
        }
    }

    pub fn session(&self) -> u64 {
        self.session
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed
    }

    /// Returns the subkeys at `phi(Hash(x, caller))` and erases all others.
    ///
    /// A second read fails with [`Error::SessionConsumed`].
    pub fn read(
        &mut self,
        params: &SchemeParams,
        x: &[u8; 32],
        caller: &Measurement,
        log: &AdversaryLog,
    ) -> Result<ServedKeys> {
        if self.consumed {
            return Err(Error::SessionConsumed(self.session));
        }
        if self.slots.len() != params.subkeys_per_session()
            || self.slots.contains(&Slot::Erased)
        {
            return Err(Error::MemoryCorrupted(self.session));
        }
        let selection = eot_select(params, x, caller);
        let mut subkeys = Vec::with_capacity(selection.indices().len());
        for &i in selection.indices() {
            match std::mem::replace(&mut self.slots[i], Slot::Erased) {
                Slot::Populated(sk) => subkeys.push(sk),
                Slot::Erased => unreachable!("indices are distinct and slots were populated"),
            }
        }
        // Every slot is now erased: the selected ones moved out above.
        for slot in &mut self.slots {
            *slot = Slot::Erased;
        }
        self.consumed = true;
        log.record(Observation::Served {
            session: self.session,
            indices: selection.indices().to_vec(),
            subkeys: subkeys.clone(),
        });
        Ok(ServedKeys { selection, subkeys })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{Repr, Scalar};
    use crate::protocol::measure;

    fn buffer(params: &SchemeParams) -> ObliviousBuffer {
        let g = params.group().second_generator();
        let keys = (0..params.subkeys_per_session())
            .map(|i| g.exp(&Scalar::from_u64(i as u64 + 1)))
            .collect();
        ObliviousBuffer::load(1, keys)
    }

    #[test]
    fn read_once_and_erase() {
        let params = SchemeParams::new(2, 4, 3, 256).unwrap();
        let mut buf = buffer(&params);
        let original: Vec<_> = buf.slots().to_vec();
        let log = AdversaryLog::new();
        let served = buf.read(&params, &[1; 32], &measure(b"ra"), &log).unwrap();
        assert_eq!(served.subkeys.len(), 4);
        for (pos, &i) in served.selection.indices().iter().enumerate() {
            assert_eq!(original[i], Slot::Populated(served.subkeys[pos]));
        }
        assert!(buf.slots().iter().all(|s| *s == Slot::Erased));
        assert!(buf.is_consumed());
        assert_eq!(
            buf.read(&params, &[1; 32], &measure(b"ra"), &log)
                .unwrap_err(),
            Error::SessionConsumed(1)
        );
        assert_eq!(log.snapshot().len(), 1);
    }

    #[test]
    fn corrupted_buffer() {
        let params = SchemeParams::new(2, 2, 2, 256).unwrap();
        let mut buf = buffer(&params);
        buf.slots[3] = Slot::Erased;
        let err = buf
            .read(&params, &[0; 32], &measure(b"ra"), &AdversaryLog::new())
            .unwrap_err();
        assert_eq!(err, Error::MemoryCorrupted(1));

        let short = ObliviousBuffer::load(2, vec![SourceElement::identity(Repr::Second)]);
        let mut short = short;
        assert!(short
            .read(&params, &[0; 32], &measure(b"ra"), &AdversaryLog::new())
            .is_err());
    }
}
