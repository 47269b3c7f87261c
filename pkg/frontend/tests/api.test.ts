import { afterEach, describe, expect, it, vi } from "vitest";
import { ApiClient, ApiError } from "../src/api.js";
import { jsonResponse, stubFetch, workedSession } from "./helpers.js";

afterEach(() => vi.unstubAllGlobals());

describe("ApiClient", () => {
  it("sends JSON bodies and parses envelopes", async () => {
    const calls = stubFetch([jsonResponse({ session: workedSession() })]);
    const client = new ApiClient("");
    const result = await client.submitClaim("s1", "a claim");
    expect(calls[0]).toMatchObject({
      url: "/sessions/s1/claim",
      method: "POST",
      body: { text: "a claim" },
    });
    expect(result.session.id).toBe("s1");
  });

  it("maps error bodies onto ApiError", async () => {
    stubFetch([jsonResponse({ code: "invalid-settings", message: "depth must be 1 or 2", field: "depth" }, 422)]);
    const client = new ApiClient("");
    const failure = await client.putSettings("s1", { depth: 3 }).catch((err) => err);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.status).toBe(422);
    expect(failure.code).toBe("invalid-settings");
    expect(failure.field).toBe("depth");
  });

  it("turns fetch rejections into network errors", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => Promise.reject(new TypeError("offline"))));
    const failure = await new ApiClient("").getSession("s1").catch((err) => err);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.status).toBe(0);
    expect(failure.code).toBe("network");
  });

  it("handles 204 deletes", async () => {
    stubFetch([new Response(null, { status: 204 })]);
    await expect(new ApiClient("").deleteSession("s1")).resolves.toBeUndefined();
  });

  it("uploads documents as multipart form data", async () => {
    const calls = stubFetch([jsonResponse({ session: workedSession(), document: {} })]);
    const file = new File([new Uint8Array([0x25, 0x50, 0x44, 0x46])], "x.pdf", { type: "application/pdf" });
    await new ApiClient("").uploadDocument("s1", file);
    expect(calls[0].method).toBe("POST");
    expect(calls[0].body).toBe("form-data");
  });
});
