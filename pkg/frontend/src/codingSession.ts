/** Blind validation coding session.
 *
 * The session holds only sample ids, chunk text and the coder's own
 * choices — never rule text or machine tag values — so the blind
 * protocol is guaranteed by construction. Progress is persisted through
 * an injected storage so a half-finished session survives reloads.
 */

import type { CoderRow } from "./types.js";

export interface SessionRow {
  sampleId: string;
  chunk: string;
  choice: 0 | 1 | null;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

interface Snapshot {
  tag: string;
  rows: SessionRow[];
  cursor: number;
}

export class CodingSession {
  rows: SessionRow[];
  cursor = 0;

  constructor(
    public readonly tag: string,
    coderRows: CoderRow[],
    private readonly storage: StorageLike | null = null,
    private readonly storageKey = "ruletag-coding-session",
  ) {
    this.rows = coderRows.map((r) => ({
      sampleId: r.sample_id,
      chunk: r.chunk,
      choice: null,
    }));
  }

  get current(): SessionRow | null {
    return this.rows[this.cursor] ?? null;
  }

  answered(): number {
    return this.rows.filter((r) => r.choice !== null).length;
  }

  complete(): boolean {
    return this.rows.length > 0 && this.answered() === this.rows.length;
  }

  /** Record a choice for the current row and advance to the next
   * unanswered one (wrapping), so revisited rows can be corrected. */
  choose(choice: 0 | 1): void {
    const row = this.current;
    if (!row) return;
    row.choice = choice;
    const next = this.nextUnanswered(this.cursor + 1);
    if (next !== null) this.cursor = next;
    this.persist();
  }

  private nextUnanswered(from: number): number | null {
    for (let step = 0; step < this.rows.length; step++) {
      const i = (from + step) % this.rows.length;
      if (this.rows[i].choice === null) return i;
    }
    return null;
  }

  goto(index: number): void {
    if (index >= 0 && index < this.rows.length) {
      this.cursor = index;
      this.persist();
    }
  }

  submission(): { sample_id: string; values: Record<string, number> }[] {
    if (!this.complete()) {
      throw new Error("session incomplete: all rows must be coded before submit");
    }
    return this.rows.map((r) => ({
      sample_id: r.sampleId,
      values: { [this.tag]: r.choice as number },
    }));
  }

  persist(): void {
    if (!this.storage) return;
    const snapshot: Snapshot = { tag: this.tag, rows: this.rows, cursor: this.cursor };
    this.storage.setItem(this.storageKey, JSON.stringify(snapshot));
  }

  clearPersisted(): void {
    this.storage?.removeItem(this.storageKey);
  }

  /** Restore a persisted session if it matches the freshly exported
   * sample (same tag, same sample ids in order); otherwise null. */
  static restore(
    tag: string,
    coderRows: CoderRow[],
    storage: StorageLike,
    storageKey = "ruletag-coding-session",
  ): CodingSession | null {
    const raw = storage.getItem(storageKey);
    if (!raw) return null;
    let snapshot: Snapshot;
    try {
      snapshot = JSON.parse(raw) as Snapshot;
    } catch {
      return null;
    }
    if (snapshot.tag !== tag) return null;
    if (
      snapshot.rows.length !== coderRows.length ||
      !snapshot.rows.every((r, i) => r.sampleId === coderRows[i].sample_id)
    ) {
      return null;
    }
    const session = new CodingSession(tag, coderRows, storage, storageKey);
    session.rows = snapshot.rows;
    session.cursor = Math.min(snapshot.cursor, coderRows.length - 1);
    return session;
  }
}
