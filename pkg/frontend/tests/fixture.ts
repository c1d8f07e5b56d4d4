import {
  ApiError,
  NextPairResponse,
  ProgressResponse,
  SubmitRequest,
  SubmitResponse,
  Transport,
} from "../src/types.js";

export function passageOf(doc: string): string {
  return `Passage text for ${doc}.`;
}

export function docOfPassage(passage: string): string {
  const match = /^Passage text for (.+)\.$/.exec(passage);
  if (match === null || match[1] === undefined) throw new Error(`not a fixture passage: ${passage}`);
  return match[1];
}

/**
 * In-memory stand-in for the judging service: a single-elimination
 * tournament over one topic with the real lease semantics.  Every
 * `nextPair` rotates the lease token; a submit with anything but the
 * latest token is rejected with 409, exactly like the live service.
 * `expireLease` simulates the clock running out, optionally re-issuing
 * the pair with the passages swapped.
 */
export class ScriptedService implements Transport {
  private queue: string[];
  private nextRound: string[] = [];
  private matchup: { a: string; b: string } | null = null;
  private pairSeq = 0;
  private issueSeq = 0;
  private currentToken: string | null = null;
  private currentPairId = "";
  private flipped = false;
  private flipNext = false;

  champion: string | null = null;
  submits: SubmitRequest[] = [];
  applied: { pairId: string; winnerDoc: string }[] = [];
  rejected = 0;

  constructor(candidates: string[]) {
    if (candidates.length === 0) throw new Error("need at least one candidate");
    this.queue = [...candidates];
    this.advanceBracket();
  }

  private advanceBracket(): void {
    while (this.matchup === null && this.champion === null) {
      if (this.queue.length >= 2) {
        const a = this.queue.shift();
        const b = this.queue.shift();
        if (a === undefined || b === undefined) throw new Error("unreachable");
        this.matchup = { a, b };
        this.currentPairId = `q1:t${String(this.pairSeq++).padStart(4, "0")}`;
        this.currentToken = null;
        this.flipped = false;
        return;
      }
      if (this.queue.length === 1) {
        const bye = this.queue.shift();
        if (bye !== undefined) this.nextRound.push(bye);
      }
      if (this.nextRound.length === 1) {
        this.champion = this.nextRound[0] ?? null;
        return;
      }
      this.queue = this.nextRound;
      this.nextRound = [];
    }
  }

  /** Invalidate the outstanding token, as if its lease timed out. */
  expireLease(flipSides = false): void {
    this.currentToken = null;
    this.flipNext = flipSides;
  }

  async nextPair(_assessor: string): Promise<NextPairResponse> {
    if (this.matchup === null) return { done: true };
    if (this.flipNext) {
      this.flipped = !this.flipped;
      this.flipNext = false;
    }
    this.currentToken = `tok${this.issueSeq++}`;
    const left = this.flipped ? this.matchup.b : this.matchup.a;
    const right = this.flipped ? this.matchup.a : this.matchup.b;
    return {
      pair_id: this.currentPairId,
      topic: "q1",
      question: "Which passage answers the question better?",
      passage_a: passageOf(left),
      passage_b: passageOf(right),
      token: this.currentToken,
    };
  }

  async submit(body: SubmitRequest): Promise<SubmitResponse> {
    this.submits.push(body);
    const stale =
      this.matchup === null ||
      this.currentToken === null ||
      body.token !== this.currentToken ||
      body.pair_id !== this.currentPairId;
    if (stale) {
      this.rejected += 1;
      throw new ApiError(409, "lease expired or unknown");
    }
    if (body.winner !== "a" && body.winner !== "b") {
      throw new ApiError(400, `winner must be 'a' or 'b', got ${body.winner}`);
    }
    const pickedSlotA = body.winner === "a" ? !this.flipped : this.flipped;
    const matchup = this.matchup;
    if (matchup === null) throw new Error("unreachable");
    const winnerDoc = pickedSlotA ? matchup.a : matchup.b;
    this.applied.push({ pairId: this.currentPairId, winnerDoc });
    this.nextRound.push(winnerDoc);
    this.matchup = null;
    this.currentToken = null;
    this.advanceBracket();
    return { ok: true, excluded: false };
  }

  async progress(): Promise<ProgressResponse> {
    return {
      mode: "tournament",
      complete: this.champion !== null,
      judgments_applied: this.applied.length,
      topics: { q1: { stage: this.champion === null ? "tournament" : "finalized" } },
    };
  }
}
