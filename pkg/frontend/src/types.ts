/** Wire types for the judging service API. */

export type Side = "a" | "b";

/** GET /api/next-pair payload when a pair is available. */
export interface PairPayload {
  pair_id: string;
  topic: string;
  question: string;
  passage_a: string;
  passage_b: string;
  token: string;
}

/** GET /api/next-pair payload when nothing is pending for this assessor. */
export interface DoneResponse {
  done: true;
}

export type NextPairResponse = PairPayload | DoneResponse;

export function isDone(response: NextPairResponse): response is DoneResponse {
  return (response as DoneResponse).done === true;
}

/** POST /api/judgment body. */
export interface SubmitRequest {
  pair_id: string;
  token: string;
  winner: Side;
}

export interface SubmitResponse {
  ok: boolean;
  excluded: boolean;
}

export interface ProgressResponse {
  mode: string;
  complete: boolean;
  judgments_applied: number;
  topics: Record<string, Record<string, unknown>>;
}

/** Error carrying the HTTP status so callers can branch on 409 (stale lease). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The slice of the service the client needs; tests script it in memory. */
export interface Transport {
  nextPair(assessor: string): Promise<NextPairResponse>;
  submit(body: SubmitRequest): Promise<SubmitResponse>;
  progress(): Promise<ProgressResponse>;
}
