//! Ring transfers, the in-process message bus and the public bulletin board.

pub mod board;
pub mod bus;
pub mod topology;
pub mod transfer;

pub use board::{BulletinBoard, Entry, Family};
pub use bus::{Action, Envelope, Message, Network, Node};
pub use topology::{Direction, RingTopology};
pub use transfer::{ring_transfer, Tag, Terminal, TransferItem, TransferOutcome, Transform};
