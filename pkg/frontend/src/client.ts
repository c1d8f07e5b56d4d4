import { ApiError, isDone, PairPayload, Side, Transport } from "./types.js";

export type Phase =
  | "idle"
  | "loading"
  | "viewing"
  | "submitting"
  | "drained"
  | "complete"
  | "error";

export interface ClientState {
  phase: Phase;
  pair: PairPayload | null;
  judged: number;
  excluded: boolean;
  message: string;
}

export type Listener = (state: ClientState) => void;

// extra submit attempts tolerated when a lease expires mid-decision
const RELEASE_RETRIES = 3;

/**
 * Drives one assessor's judging session.
 *
 * The client owns a single pair at a time.  `choose` is the only way to
 * resolve it; while a submission is in flight the phase leaves "viewing",
 * so repeated clicks and key presses cannot double-submit.  A 409 from the
 * service means the lease expired under us: the pair is re-leased and the
 * decision resubmitted, following the chosen passage even if the service
 * re-issues the pair with sides swapped.
 */
export class JudgeClient {
  private phase: Phase = "idle";
  private pair: PairPayload | null = null;
  private judged = 0;
  private excluded = false;
  private message = "";
  private readonly listeners: Listener[] = [];

  constructor(
    private readonly transport: Transport,
    readonly assessor: string,
  ) {}

  get state(): ClientState {
    return {
      phase: this.phase,
      pair: this.pair,
      judged: this.judged,
      excluded: this.excluded,
      message: this.message,
    };
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  /** Fetch the first pair. */
  async start(): Promise<void> {
    if (this.phase !== "idle" && this.phase !== "error") return;
    await this.advance();
  }

  /** Poll again after the queue looked empty. */
  async refresh(): Promise<void> {
    if (this.phase !== "drained") return;
    await this.advance();
  }

  /**
   * Submit the passage on `side` as the better answer for the current pair.
   *
   * Returns true once the judgment is accepted.  Returns false when there
   * is nothing to decide (no pair on screen, or a submission already in
   * flight), or when the pair was taken over by another assessor.
   */
  async choose(side: Side): Promise<boolean> {
    if (this.phase !== "viewing" || this.pair === null) return false;
    const chosenPassage = side === "a" ? this.pair.passage_a : this.pair.passage_b;
    let current = this.pair;
    let winner: Side = side;
    this.set("submitting", current);

    for (let attempt = 0; ; attempt++) {
      try {
        const result = await this.transport.submit({
          pair_id: current.pair_id,
          token: current.token,
          winner,
        });
        this.judged += 1;
        if (result.excluded) this.excluded = true;
        await this.advance();
        return true;
      } catch (error) {
        const stale =
          error instanceof ApiError && error.status === 409 && attempt < RELEASE_RETRIES;
        if (!stale) {
          this.fail(error);
          return false;
        }
      }

      // The lease expired under us: take a fresh one.  Pending pairs are
      // re-issued in order, so the same pair comes back unless another
      // assessor already judged it.
      let reissued;
      try {
        reissued = await this.transport.nextPair(this.assessor);
      } catch (error) {
        this.fail(error);
        return false;
      }
      if (isDone(reissued)) {
        await this.resolveDrained();
        return false;
      }
      if (reissued.pair_id !== current.pair_id) {
        this.set("viewing", reissued, "the previous pair went to another assessor");
        return false;
      }
      if (reissued.passage_a === chosenPassage) {
        winner = "a";
      } else if (reissued.passage_b === chosenPassage) {
        winner = "b";
      }
      current = reissued;
    }
  }

  private async advance(): Promise<void> {
    this.set("loading", null);
    let response;
    try {
      response = await this.transport.nextPair(this.assessor);
    } catch (error) {
      this.fail(error);
      return;
    }
    if (isDone(response)) {
      await this.resolveDrained();
      return;
    }
    this.set("viewing", response);
  }

  private async resolveDrained(): Promise<void> {
    // "done" only says this assessor has nothing pending; the campaign may
    // still be waiting on pairs leased to others
    let complete = false;
    try {
      complete = (await this.transport.progress()).complete;
    } catch {
      // progress is advisory, treat a failure as "not finished"
    }
    this.set(complete ? "complete" : "drained", null);
  }

  private set(phase: Phase, pair: PairPayload | null, message = ""): void {
    this.phase = phase;
    this.pair = pair;
    this.message = message;
    this.emit();
  }

  private fail(error: unknown): void {
    this.set("error", null, error instanceof Error ? error.message : String(error));
  }

  private emit(): void {
    const snapshot = this.state;
    for (const listener of this.listeners) listener(snapshot);
  }
}
