// Controller: owns the state, talks to the service, re-renders.
// Controls lock while a mutation is in flight (no optimistic UI), and
// every 200 response's embedded session replaces the view state.

import { ApiClient, ApiError } from "./api.js";
import type { SessionView } from "./types.js";
import { Handlers, render, ViewState } from "./view.js";

const SESSION_KEY = "argkit-session-id";

export class App {
  state: ViewState = {
    session: null,
    busy: false,
    banner: null,
    settingsOpen: false,
    sliderError: null,
    addForm: null,
    verdictFlash: false,
  };

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
    private storage: Pick<Storage, "getItem" | "setItem" | "removeItem"> | null = null,
  ) {}

  async init(): Promise<void> {
    this.paint();
    const remembered = this.storage?.getItem(SESSION_KEY);
    if (remembered) {
      try {
        this.applySession((await this.client.getSession(remembered)).session);
        return;
      } catch {
        this.storage?.removeItem(SESSION_KEY);
      }
    }
    try {
      const created = await this.client.createSession();
      this.storage?.setItem(SESSION_KEY, created.session.id);
      this.applySession(created.session);
    } catch (err) {
      this.state.banner = describe(err);
      this.paint();
    }
  }

  paint(): void {
    render(this.root, this.state, this.handlers());
  }

  applySession(next: SessionView): void {
    const previousRoot = this.state.session?.verdict?.root_strength ?? null;
    const nextRoot = next.verdict?.root_strength ?? null;
    this.state.verdictFlash = previousRoot !== null && nextRoot !== null && previousRoot !== nextRoot;
    this.state.session = next;
    this.paint();
  }

  private async refetch(): Promise<void> {
    if (!this.state.session) return;
    this.applySession((await this.client.getSession(this.state.session.id)).session);
  }

  /** Run one mutation with locked controls; banner on failure. */
  private async mutate(
    action: () => Promise<SessionView>,
    onError?: (err: ApiError) => boolean,
  ): Promise<void> {
    if (this.state.busy) return;
    this.state.busy = true;
    this.state.banner = null;
    this.paint();
    try {
      const next = await action();
      this.state.busy = false;
      this.state.sliderError = null;
      this.state.addForm = null;
      if (this.state.session && next.revision < this.state.session.revision) {
        // stale response: replace with the newest state
        await this.refetch();
        return;
      }
      this.applySession(next);
    } catch (err) {
      this.state.busy = false;
      const handled = err instanceof ApiError && onError ? onError(err) : false;
      if (!handled) {
        this.state.banner = describe(err);
      }
      if (err instanceof ApiError && err.status === 409 && err.code === "conflict") {
        await this.refetch().catch(() => undefined);
        return;
      }
      this.paint();
    }
  }

  private sid(): string {
    return this.state.session!.id;
  }

  handlers(): Handlers {
    return {
      onClaimSubmit: (text) =>
        void this.mutate(async () => (await this.client.submitClaim(this.sid(), text)).session),

      onSliderCommit: (argumentId, value, revert) =>
        void this.mutate(
          async () => (await this.client.patchScore(this.sid(), argumentId, value)).session,
          (err) => {
            revert();
            if (err.status === 422) {
              this.state.sliderError = { argumentId, message: err.message };
              return true;
            }
            return false;
          },
        ),

      onAddFormOpen: (parent, polarity) => {
        this.state.addForm = { parent, polarity };
        this.paint();
      },
      onAddFormClose: () => {
        this.state.addForm = null;
        this.paint();
      },
      onAddGenerate: (parent, polarity) =>
        void this.mutate(
          async () =>
            (await this.client.addArgument(this.sid(), { parent, polarity, mode: "generate" })).session,
        ),
      onAddManual: (parent, polarity, text, score) =>
        void this.mutate(
          async () =>
            (
              await this.client.addArgument(this.sid(), {
                parent,
                polarity,
                mode: "manual",
                text,
                ...(score === null ? {} : { base_score: score }),
              })
            ).session,
        ),

      onChatSend: (message) =>
        void this.mutate(async () => (await this.client.postChat(this.sid(), message)).session),

      onUpload: (file) =>
        void this.mutate(async () => (await this.client.uploadDocument(this.sid(), file)).session),

      onSettingsOpen: () => {
        this.state.settingsOpen = true;
        this.paint();
      },
      onSettingsClose: () => {
        this.state.settingsOpen = false;
        this.paint();
      },
      onSettingsSave: (settings) =>
        void this.mutate(async () => {
          const next = (await this.client.putSettings(this.sid(), settings)).session;
          this.state.settingsOpen = false;
          return next;
        }),

      onBannerDismiss: () => {
        this.state.banner = null;
        this.paint();
      },
    };
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.field ? `${err.code}: ${err.message} (${err.field})` : `${err.code}: ${err.message}`;
  }
  return String(err);
}

export function bootstrap(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const client = new ApiClient("");
  // session id survives reloads within the tab; nothing else is stored
  const app = new App(root, client, window.sessionStorage);
  void app.init();
}
