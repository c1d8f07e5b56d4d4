import {
  ApiError,
  NextPairResponse,
  ProgressResponse,
  SubmitRequest,
  SubmitResponse,
  Transport,
} from "./types.js";

async function readJson<T>(response: Response): Promise<T> {
  const text = await response.text();
  let body: unknown = {};
  if (text) {
    try {
      body = JSON.parse(text);
    } catch {
      body = { error: text };
    }
  }
  if (!response.ok) {
    const detail = (body as { error?: unknown }).error;
    throw new ApiError(response.status, String(detail ?? response.statusText));
  }
  return body as T;
}

/** fetch-based transport against the judging service. */
export class HttpTransport implements Transport {
  // base is "" when the UI is served by the service itself
  constructor(private readonly base: string = "") {}

  async nextPair(assessor: string): Promise<NextPairResponse> {
    const url = `${this.base}/api/next-pair?assessor=${encodeURIComponent(assessor)}`;
    return readJson(await fetch(url));
  }

  async submit(body: SubmitRequest): Promise<SubmitResponse> {
    const response = await fetch(`${this.base}/api/judgment`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return readJson(response);
  }

  async progress(): Promise<ProgressResponse> {
    return readJson(await fetch(`${this.base}/api/progress`));
  }
}
